#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oaa/oracle.hpp"
#include "oaa/region.hpp"
#include "oaa/tensor.hpp"

namespace oaa {

struct AttackConfig {
  double mu = 0.2;
  /// Bounds total oracle queries, including the initial classification.
  std::uint64_t max_queries = 20000;
  /// Seeds the coordinate order built by the caller.
  std::uint64_t seed = 0;
  RegionConfig region;

  void validate() const;
};

struct AcceptedStep {
  Coordinate coord;
  /// Change actually applied, after clamping.
  double delta = 0.0;
};

struct AttackResult {
  ImageTensor adversarial;
  bool success = false;
  std::uint64_t queries = 0;
  std::uint64_t iterations = 0;
  std::vector<AcceptedStep> accepted_steps;
  std::size_t original_class = 0;
  std::size_t final_class = 0;
  /// Probability of original_class at the last accepted point.
  double final_probability = 0.0;
  double l2 = 0.0;
};

/// Pixel-basis coordinate search restricted to `coords`.
///
/// One query on the original fixes the tracked class and its probability p.
/// Each iteration consumes the next coordinate, probes +mu and, if that did
/// not lower p, -mu. A probe is kept iff the tracked probability strictly
/// drops. The loop ends on misclassification, budget exhaustion or when the
/// coordinates run out.
///
/// Throws PreconditionError if the oracle does not predict `true_class` on
/// `original`, ConfigError for an empty coordinate set or a bad config, and
/// lets OracleFailure propagate.
AttackResult run_attack(const ImageTensor& original, Oracle& oracle, const CoordinateSet& coords,
                        const AttackConfig& cfg, std::size_t true_class);

/// adversarial - original.
Perturbation perturbation_of(const AttackResult& result, const ImageTensor& original);

}  // namespace oaa
