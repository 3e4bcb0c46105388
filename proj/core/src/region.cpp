#include "oaa/region.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "oaa/errors.hpp"

namespace oaa {

void validate_box(const DetectionBox& box, std::size_t height, std::size_t width) {
  if (!(box.confidence >= 0.0 && box.confidence <= 1.0)) {
    throw ConfigError("box '" + box.label + "' confidence outside [0, 1]");
  }
  if (box.left >= box.right || box.top >= box.bottom) {
    throw BoundsError("box '" + box.label + "' is empty or inverted");
  }
  if (box.right > width || box.bottom > height) {
    throw BoundsError("box '" + box.label + "' extends past the " + std::to_string(height) +
                      "x" + std::to_string(width) + " image");
  }
}

RegionMask::RegionMask(std::size_t height, std::size_t width, bool value)
    : height_(height), width_(width), bits_(height * width, value ? 1 : 0) {}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RegionMask RegionMask::operator&(const RegionMask& other) const {
  if (height_ != other.height_ || width_ != other.width_) {
    throw ShapeError("mask intersection: dimension mismatch");
  }
  RegionMask out(height_, width_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & other.bits_[i];
  return out;
}

std::string_view to_string(RegionMode mode) {
  switch (mode) {
    case RegionMode::kObjectAttentional: return "oa";
    case RegionMode::kBoxesOnly: return "sly";
    case RegionMode::kSaliencyOnly: return "slh";
    case RegionMode::kFull: return "full";
  }
  return "unknown";
}

RegionMode parse_region_mode(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "oa") return RegionMode::kObjectAttentional;
  if (lower == "sly") return RegionMode::kBoxesOnly;
  if (lower == "slh") return RegionMode::kSaliencyOnly;
  if (lower == "full") return RegionMode::kFull;
  throw ConfigError("unknown region mode '" + std::string(text) + "'");
}

void RegionConfig::validate() const {
  if (!(p_t >= 0.0 && p_t <= 1.0)) throw ConfigError("p_t must lie in [0, 1]");
  if (!(epsilon > 1.0)) throw ConfigError("epsilon must be greater than 1");
}

RegionMask rasterize_boxes(std::span<const DetectionBox> boxes, double p_t, std::size_t height,
                           std::size_t width) {
  RegionMask mask(height, width);
  for (const auto& box : boxes) {
    validate_box(box, height, width);
    if (!(box.confidence > p_t)) continue;
    for (std::size_t y = box.top; y < box.bottom; ++y) {
      for (std::size_t x = box.left; x < box.right; ++x) mask.set(y, x);
    }
  }
  return mask;
}

double activation_factor(const RegionMask& s1, const RegionMask& s2) {
  const std::size_t detected = s1.count();
  const std::size_t overlap = (s1 & s2).count();
  if (detected == 0) return 0.0;
  if (overlap == 0) return kInfiniteActivation;
  return static_cast<double>(detected) / static_cast<double>(overlap);
}

RegionMask combine(std::span<const DetectionBox> boxes, const RegionMask& saliency,
                   const RegionConfig& cfg, std::size_t height, std::size_t width) {
  cfg.validate();
  if (saliency.height() != height || saliency.width() != width) {
    throw ShapeError("saliency mask is " + std::to_string(saliency.height()) + "x" +
                     std::to_string(saliency.width()) + ", image is " + std::to_string(height) +
                     "x" + std::to_string(width));
  }

  auto or_full = [&](RegionMask m) {
    return m.empty() ? RegionMask::full(height, width) : m;
  };

  switch (cfg.mode) {
    case RegionMode::kFull:
      return RegionMask::full(height, width);
    case RegionMode::kSaliencyOnly:
      return or_full(saliency);
    case RegionMode::kBoxesOnly:
      return or_full(rasterize_boxes(boxes, cfg.p_t, height, width));
    case RegionMode::kObjectAttentional:
      break;
  }

  RegionMask detected = rasterize_boxes(boxes, cfg.p_t, height, width);
  if (detected.empty()) return RegionMask::full(height, width);
  // An empty intersection yields an infinite factor, so it always takes the
  // box branch.
  if (activation_factor(detected, saliency) > cfg.epsilon) return detected;
  return detected & saliency;
}

CoordinateSet::CoordinateSet(Shape shape, std::vector<Coordinate> coords)
    : shape_(shape), coords_(std::move(coords)) {
  std::vector<std::uint8_t> seen(shape_.size(), 0);
  for (const auto& c : coords_) {
    auto& s = seen[flatten_index(c, shape_)];
    if (s) throw ConfigError("coordinate set contains duplicates");
    s = 1;
  }
}

CoordinateSet mask_to_coordinates(const RegionMask& mask, std::size_t channels,
                                  std::uint64_t seed) {
  const Shape shape{mask.height(), mask.width(), channels};
  std::vector<Coordinate> coords;
  coords.reserve(mask.count() * channels);
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      if (!mask.at(y, x)) continue;
      for (std::size_t c = 0; c < channels; ++c) coords.push_back({y, x, c});
    }
  }
  // Fisher-Yates driven by raw mt19937_64 output; std::shuffle and the
  // standard distributions are implementation-defined.
  std::mt19937_64 rng(seed);
  for (std::size_t i = coords.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(coords[i - 1], coords[j]);
  }
  return CoordinateSet(shape, std::move(coords));
}

}  // namespace oaa
