#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oaa {

/// Image dimensions. Data is stored row-major, channels-last.
struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 3;

  std::size_t pixels() const { return height * width; }
  std::size_t size() const { return height * width * channels; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct Coordinate {
  std::size_t y = 0;
  std::size_t x = 0;
  std::size_t c = 0;
  friend bool operator==(const Coordinate&, const Coordinate&) = default;
  friend auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

/// (y * width + x) * channels + c. Throws BoundsError for coordinates
/// outside `shape`.
std::size_t flatten_index(Coordinate coord, const Shape& shape);

/// Inverse of flatten_index.
Coordinate unflatten_index(std::size_t index, const Shape& shape);

/// H x W x C image with every element finite and in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  /// All-zero image.
  explicit ImageTensor(Shape shape);
  /// Throws ShapeError on a length mismatch and ConfigError when a value is
  /// not finite or lies outside [0, 1].
  ImageTensor(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::span<const double> data() const { return data_; }

  double at(Coordinate coord) const { return data_[flatten_index(coord, shape_)]; }
  double operator[](std::size_t index) const { return data_[index]; }

  /// Moves one element by `alpha`, clamping to [0, 1]. The realized change
  /// (new - old, as computed in double) never exceeds |alpha| in magnitude;
  /// a sum that rounds past it is pulled back by one ulp. Returns that change.
  double add_clamped(std::size_t index, double alpha);

  /// Restores one element to a previously held value.
  void restore(std::size_t index, double value);

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Signed difference between two images of the same shape.
class Perturbation {
 public:
  Perturbation() = default;
  Perturbation(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::span<const double> data() const { return data_; }
  double operator[](std::size_t index) const { return data_[index]; }

  std::size_t nonzero_count() const;
  double max_abs() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Copy of `image` with the element at `coord` moved by `alpha` and clamped
/// to [0, 1].
ImageTensor apply_step(const ImageTensor& image, Coordinate coord, double alpha);

/// Euclidean norm of a - b over all H*W*C values.
double l2_distance(const ImageTensor& a, const ImageTensor& b);

/// b - a, elementwise.
Perturbation difference(const ImageTensor& a, const ImageTensor& b);

void require_same_shape(const Shape& a, const Shape& b, const char* what);

}  // namespace oaa
