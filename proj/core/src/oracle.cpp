#include "oaa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "oaa/errors.hpp"

namespace oaa {

ProbabilityVector::ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw OracleFailure("probability vector needs at least 2 classes");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw OracleFailure("probability " + std::to_string(v) + " outside [0, 1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw OracleFailure("probabilities sum to " + std::to_string(sum));
  }
}

std::size_t argmax(std::span<const double> values) {
  // max_element returns the first maximum, which is the lowest-index tie-break.
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

std::size_t predict(const ProbabilityVector& probs) { return argmax(probs.values()); }

LinearSoftmaxOracle::LinearSoftmaxOracle(Shape shape, std::size_t num_classes,
                                         std::vector<double> weights, std::vector<double> bias)
    : shape_(shape),
      num_classes_(num_classes),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (num_classes_ < 2) throw ConfigError("an oracle needs at least 2 classes");
  if (weights_.size() != num_classes_ * shape_.size()) {
    throw ShapeError("weight matrix does not match classes x image size");
  }
  if (bias_.size() != num_classes_) throw ShapeError("bias length does not match classes");
}

std::vector<double> LinearSoftmaxOracle::logits(const ImageTensor& image) const {
  require_same_shape(image.shape(), shape_, "builtin oracle input");
  const auto x = image.data();
  const std::size_t dim = shape_.size();
  std::vector<double> z(num_classes_);
  for (std::size_t k = 0; k < num_classes_; ++k) {
    const double* w = weights_.data() + k * dim;
    double acc = bias_[k];
    for (std::size_t i = 0; i < dim; ++i) acc += w[i] * x[i];
    z[k] = acc;
  }
  return z;
}

ProbabilityVector LinearSoftmaxOracle::classify(const ImageTensor& image) {
  auto z = logits(image);
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : z) v /= total;
  return ProbabilityVector(std::move(z));
}

std::unique_ptr<LinearSoftmaxOracle> make_builtin_oracle(std::uint64_t seed, Shape shape,
                                                         std::size_t num_classes,
                                                         const RegionMask* support) {
  if (num_classes < 2) throw ConfigError("an oracle needs at least 2 classes");
  if (support && (support->height() != shape.height || support->width() != shape.width)) {
    throw ShapeError("support mask does not match the oracle input shape");
  }
  const std::size_t dim = shape.size();
  std::vector<std::uint8_t> active(dim, 1);
  std::size_t active_count = dim;
  if (support) {
    active_count = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      const Coordinate c = unflatten_index(i, shape);
      active[i] = support->at(c.y, c.x) ? 1 : 0;
      active_count += active[i];
    }
  }

  std::mt19937_64 rng(seed);
  // 53 random mantissa bits, uniform in [0, 1). Portable, unlike
  // std::uniform_real_distribution.
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double scale = active_count ? 3.0 / std::sqrt(static_cast<double>(active_count)) : 0.0;

  std::vector<double> weights(num_classes * dim, 0.0);
  for (std::size_t k = 0; k < num_classes; ++k) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double w = (2.0 * unit() - 1.0) * scale;
      if (active[i]) weights[k * dim + i] = w;
    }
  }
  std::vector<double> bias(num_classes);
  for (double& b : bias) b = unit() - 0.5;
  return std::make_unique<LinearSoftmaxOracle>(shape, num_classes, std::move(weights),
                                               std::move(bias));
}

ProbabilityVector SpyOracle::classify(const ImageTensor& image) {
  ledger_.record();
  return inner_.classify(image);
}

std::unique_ptr<SpyOracle> wrap_with_spy(Oracle& inner) {
  return std::make_unique<SpyOracle>(inner);
}

}  // namespace oaa
