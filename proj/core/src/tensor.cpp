#include "oaa/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oaa/errors.hpp"

namespace oaa {

namespace {

std::string describe(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
         std::to_string(s.channels);
}

}  // namespace

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + describe(a) + " vs " +
                     describe(b));
  }
}

std::size_t flatten_index(Coordinate coord, const Shape& shape) {
  if (coord.y >= shape.height || coord.x >= shape.width || coord.c >= shape.channels) {
    throw BoundsError("coordinate (" + std::to_string(coord.y) + "," + std::to_string(coord.x) +
                      "," + std::to_string(coord.c) + ") outside " + describe(shape));
  }
  return (coord.y * shape.width + coord.x) * shape.channels + coord.c;
}

Coordinate unflatten_index(std::size_t index, const Shape& shape) {
  if (index >= shape.size()) {
    throw BoundsError("flat index " + std::to_string(index) + " outside " + describe(shape));
  }
  const std::size_t pixel = index / shape.channels;
  return {pixel / shape.width, pixel % shape.width, index % shape.channels};
}

ImageTensor::ImageTensor(Shape shape) : shape_(shape), data_(shape.size(), 0.0) {}

ImageTensor::ImageTensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("image data length " + std::to_string(data_.size()) + " does not match " +
                     describe(shape_));
  }
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ConfigError("image value " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

double ImageTensor::add_clamped(std::size_t index, double alpha) {
  double& slot = data_.at(index);
  const double old = slot;
  double next = std::clamp(old + alpha, 0.0, 1.0);
  while (std::abs(next - old) > std::abs(alpha)) next = std::nextafter(next, old);
  slot = next;
  return next - old;
}

void ImageTensor::restore(std::size_t index, double value) {
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw ConfigError("image value outside [0, 1]");
  }
  data_.at(index) = value;
}

Perturbation::Perturbation(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("perturbation length does not match " + describe(shape_));
  }
}

std::size_t Perturbation::nonzero_count() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; }));
}

double Perturbation::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

ImageTensor apply_step(const ImageTensor& image, Coordinate coord, double alpha) {
  if (!std::isfinite(alpha)) throw ConfigError("step must be finite");
  const std::size_t index = flatten_index(coord, image.shape());
  ImageTensor out = image;
  out.add_clamped(index, alpha);
  return out;
}

double l2_distance(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a.shape(), b.shape(), "l2_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.shape().size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Perturbation difference(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a.shape(), b.shape(), "difference");
  std::vector<double> d(a.shape().size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = b[i] - a[i];
  return Perturbation(a.shape(), std::move(d));
}

}  // namespace oaa
