#include "oaa/attack.hpp"

#include <cmath>
#include <string>

#include "oaa/errors.hpp"

namespace oaa {

void AttackConfig::validate() const {
  if (!(mu > 0.0 && mu <= 1.0)) throw ConfigError("mu must lie in (0, 1]");
  if (max_queries < 1) throw ConfigError("max_queries must be at least 1");
  region.validate();
}

AttackResult run_attack(const ImageTensor& original, Oracle& oracle, const CoordinateSet& coords,
                        const AttackConfig& cfg, std::size_t true_class) {
  cfg.validate();
  if (coords.empty()) throw ConfigError("coordinate set is empty");
  require_same_shape(coords.shape(), original.shape(), "run_attack coordinates");

  AttackResult result;
  result.adversarial = original;

  const ProbabilityVector initial = oracle.classify(original);
  result.queries = 1;
  result.original_class = predict(initial);
  if (result.original_class != true_class) {
    throw PreconditionError("original is classified as " + std::to_string(result.original_class) +
                            ", expected " + std::to_string(true_class));
  }
  const std::size_t tracked = result.original_class;
  double p = initial[tracked];
  std::size_t current_class = tracked;

  ImageTensor& x = result.adversarial;
  const Shape& shape = original.shape();
  for (const Coordinate& q : coords) {
    if (current_class != tracked || result.queries >= cfg.max_queries) break;
    ++result.iterations;
    const std::size_t index = flatten_index(q, shape);

    const double saved = x[index];
    for (const double alpha : {cfg.mu, -cfg.mu}) {
      if (result.queries >= cfg.max_queries) break;
      const double delta = x.add_clamped(index, alpha);
      const ProbabilityVector probs = oracle.classify(x);
      ++result.queries;
      if (probs[tracked] < p) {
        p = probs[tracked];
        current_class = predict(probs);
        result.accepted_steps.push_back({q, delta});
        break;
      }
      x.restore(index, saved);
    }
  }

  result.success = current_class != tracked;
  result.final_class = current_class;
  result.final_probability = p;
  result.l2 = l2_distance(x, original);
  return result;
}

Perturbation perturbation_of(const AttackResult& result, const ImageTensor& original) {
  return difference(original, result.adversarial);
}

}  // namespace oaa
