#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oaa/tensor.hpp"

namespace oaa {

/// Detector output. The rectangle is half-open: rows [top, bottom), columns
/// [left, right).
struct DetectionBox {
  std::string label;
  double confidence = 0.0;
  std::size_t left = 0;
  std::size_t top = 0;
  std::size_t right = 0;
  std::size_t bottom = 0;
};

/// Throws BoundsError when the box is empty, inverted or leaves the image,
/// ConfigError when the confidence is outside [0, 1].
void validate_box(const DetectionBox& box, std::size_t height, std::size_t width);

/// H x W binary mask of attackable pixels.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(std::size_t height, std::size_t width, bool value = false);

  static RegionMask full(std::size_t height, std::size_t width) {
    return RegionMask(height, width, true);
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }

  bool at(std::size_t y, std::size_t x) const { return bits_[y * width_ + x] != 0; }
  void set(std::size_t y, std::size_t x, bool value = true) { bits_[y * width_ + x] = value; }

  /// Number of set pixels.
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  RegionMask operator&(const RegionMask& other) const;

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class RegionMode {
  kObjectAttentional,  // boxes combined with saliency through the activation factor
  kBoxesOnly,          // SLY
  kSaliencyOnly,       // SLH
  kFull,               // whole image, the plain SimBA baseline
};

std::string_view to_string(RegionMode mode);
/// Accepts oa|sly|slh|full, case-insensitive. Throws ConfigError otherwise.
RegionMode parse_region_mode(std::string_view text);

struct RegionConfig {
  double p_t = 0.3;
  double epsilon = 3.0;
  RegionMode mode = RegionMode::kObjectAttentional;

  /// Throws ConfigError unless p_t is in [0, 1] and epsilon > 1.
  void validate() const;
};

/// Union of the boxes whose confidence is strictly above `p_t`.
RegionMask rasterize_boxes(std::span<const DetectionBox> boxes, double p_t, std::size_t height,
                           std::size_t width);

inline constexpr double kInfiniteActivation = std::numeric_limits<double>::infinity();

/// |s1| / |s1 & s2|. Returns kInfiniteActivation when the intersection is
/// empty but s1 is not, and 0 when s1 is empty.
double activation_factor(const RegionMask& s1, const RegionMask& s2);

/// Builds the attack region for the configured mode.
///
/// OA: S1 from the boxes, intersected with the saliency mask unless the
/// activation factor exceeds epsilon, in which case S1 alone is used.
/// SLY uses S1, SLH the saliency mask, FULL the whole image. An empty
/// result falls back to the whole image.
RegionMask combine(std::span<const DetectionBox> boxes, const RegionMask& saliency,
                   const RegionConfig& cfg, std::size_t height, std::size_t width);

/// Ordered, duplicate-free list of attackable coordinates.
class CoordinateSet {
 public:
  CoordinateSet() = default;
  CoordinateSet(Shape shape, std::vector<Coordinate> coords);

  const Shape& shape() const { return shape_; }
  std::span<const Coordinate> coordinates() const { return coords_; }
  std::size_t size() const { return coords_.size(); }
  bool empty() const { return coords_.empty(); }
  const Coordinate& operator[](std::size_t i) const { return coords_[i]; }

  auto begin() const { return coords_.begin(); }
  auto end() const { return coords_.end(); }

 private:
  Shape shape_;
  std::vector<Coordinate> coords_;
};

/// Every (y, x, c) with mask(y, x) set, in a pseudorandom order fixed by
/// `seed`. The order is the same on every platform.
CoordinateSet mask_to_coordinates(const RegionMask& mask, std::size_t channels,
                                  std::uint64_t seed);

}  // namespace oaa
