#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "oaa/region.hpp"
#include "oaa/tensor.hpp"

namespace oaa {

/// Classifier output over N >= 2 classes. Each value lies in [0, 1] and the
/// values sum to 1 within kProbabilityTolerance.
class ProbabilityVector {
 public:
  static constexpr double kProbabilityTolerance = 1e-5;

  /// Throws OracleFailure when the invariants do not hold.
  explicit ProbabilityVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

 private:
  std::vector<double> values_;
};

/// Index of the largest probability, lowest index on ties.
std::size_t predict(const ProbabilityVector& probs);
std::size_t argmax(std::span<const double> values);

enum class OracleKind { kBuiltin, kExternal, kSpy };

/// Soft-label black-box classifier.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual ProbabilityVector classify(const ImageTensor& image) = 0;
  virtual std::size_t num_classes() const = 0;
  virtual Shape input_shape() const = 0;
  virtual OracleKind kind() const = 0;

  std::size_t predict(const ImageTensor& image) { return oaa::predict(classify(image)); }
};

/// probs = softmax(W x + b) over the flattened image. Pure and thread-safe;
/// identical inputs give bit-identical outputs.
class LinearSoftmaxOracle final : public Oracle {
 public:
  /// `weights` is num_classes rows of shape.size() values each.
  LinearSoftmaxOracle(Shape shape, std::size_t num_classes, std::vector<double> weights,
                      std::vector<double> bias);

  ProbabilityVector classify(const ImageTensor& image) override;
  std::size_t num_classes() const override { return num_classes_; }
  Shape input_shape() const override { return shape_; }
  OracleKind kind() const override { return OracleKind::kBuiltin; }

  std::vector<double> logits(const ImageTensor& image) const;
  std::span<const double> weights() const { return weights_; }
  std::span<const double> bias() const { return bias_; }

 private:
  Shape shape_;
  std::size_t num_classes_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

/// Seeded linear-softmax oracle. Weights are uniform in [-s, s] with
/// s = 3 / sqrt(number of weighted inputs per class), biases uniform in
/// [-0.5, 0.5]. When `support` is given, only pixels inside it (all channels)
/// carry nonzero weight.
std::unique_ptr<LinearSoftmaxOracle> make_builtin_oracle(std::uint64_t seed, Shape shape,
                                                         std::size_t num_classes,
                                                         const RegionMask* support = nullptr);

/// Monotone query counter.
class QueryLedger {
 public:
  std::uint64_t total() const { return total_.load(std::memory_order_relaxed); }
  void record() { total_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> total_{0};
};

/// Delegates to another oracle and counts every classify call.
class SpyOracle final : public Oracle {
 public:
  explicit SpyOracle(Oracle& inner) : inner_(inner) {}

  ProbabilityVector classify(const ImageTensor& image) override;
  std::size_t num_classes() const override { return inner_.num_classes(); }
  Shape input_shape() const override { return inner_.input_shape(); }
  OracleKind kind() const override { return OracleKind::kSpy; }

  const QueryLedger& ledger() const { return ledger_; }

 private:
  Oracle& inner_;
  QueryLedger ledger_;
};

/// The spy keeps a reference to `inner`, which must outlive it.
std::unique_ptr<SpyOracle> wrap_with_spy(Oracle& inner);

}  // namespace oaa
