#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topkcert/smoothing.hpp"

// Simultaneous confidence bounds on the label probabilities of a smoothed
// classifier, estimated from one Monte Carlo count vector. Two estimators
// are provided: a single Clopper-Pearson lower bound on the target label
// with the trivial complement bound on everyone else, and a per-label
// Bonferroni scheme that bounds every label individually. On top of either,
// prefix sums over the strongest competitors feed the radius equation.

namespace topkcert {

enum class BoundMethod { BinoCP, SimuEM };

std::string to_string(BoundMethod method);
BoundMethod bound_method_from_string(const std::string& name);

// One-sided bounds at joint confidence level 1 - alpha: a lower bound on the
// target label's probability and upper bounds on every other label's.
struct ProbabilityBounds {
  Label target_label = 0;
  double lower = 0.0;          // lower bound on p_{target}
  std::vector<double> upper;   // index label-1; the target's entry is NaN
  double alpha = 0.0;
  BoundMethod method = BoundMethod::BinoCP;

  int label_count() const noexcept { return static_cast<int>(upper.size()); }
  double upper_for(Label label) const {
    return upper.at(static_cast<std::size_t>(label - 1));
  }
};

// Clopper-Pearson: lower = B(alpha; n_l, n - n_l + 1) (0 when n_l = 0), and
// every other label gets the complement upper bound 1 - lower. Holds jointly
// with probability >= 1 - alpha.
ProbabilityBounds binocp_bounds(const CountVector& counts, Label target,
                                double alpha);

// Per-label bounds at level alpha / c each (Bonferroni over the c labels):
// lower = B(alpha/c; n_l, n - n_l + 1) (0 when n_l = 0) and
// upper_i = B(1 - alpha/c; n_i + 1, n - n_i) (1 when n_i = n). Holds jointly
// with probability >= 1 - alpha.
ProbabilityBounds simuem_bounds(const CountVector& counts, Label target,
                                double alpha);

// values[t-1] bounds the total probability of the t weakest among the k
// strongest competitors; by construction non-decreasing in t and never above
// 1 - lower.
struct PrefixUpperBounds {
  std::vector<double> values;
  int k() const noexcept { return static_cast<int>(values.size()); }
};

// Sorts the competitors' upper bounds, keeps the k largest (ties broken
// uniformly at random by the seeded generator — tied values make the sums
// invariant to the choice), and returns for each t the sum of the t smallest
// of those k, capped at 1 - lower. Requires 1 <= k <= label_count - 1.
PrefixUpperBounds prefix_upper_bounds(const ProbabilityBounds& bounds, int k,
                                      std::uint64_t seed = 0);

}  // namespace topkcert
