#pragma once

#include <vector>

#include "topkcert/confidence_bounds.hpp"

// Tightness check for the certified radius. Everything lives in a 1-D
// quantile coordinate v in (0,1]: a base classifier is a partition of (0,1]
// into half-open interval sets, one per label. Under the clean input the
// label probability is the plain length of its set; under an input shifted
// by lambda standard deviations along the worst direction the probability of
// (a,b] becomes Phi(Phi^-1(b) - lambda) - Phi(Phi^-1(a) - lambda). The
// construction below builds, for any feasible probability bounds and any
// lambda beyond the certified radius, a classifier consistent with the
// bounds whose shifted distribution pushes the target label out of the top
// k — witnessing that no larger radius could have been certified.

namespace topkcert {

struct QuantileInterval {
  double lo = 0.0;  // exclusive
  double hi = 0.0;  // inclusive
};

// Disjoint half-open intervals (lo, hi] within [0,1], kept sorted and merged.
class QuantileIntervalSet {
 public:
  QuantileIntervalSet() = default;
  static QuantileIntervalSet interval(double lo, double hi);

  void add(double lo, double hi);
  bool empty() const noexcept { return intervals_.empty(); }
  const std::vector<QuantileInterval>& intervals() const noexcept {
    return intervals_;
  }

  // Total length: the probability of the set under the clean input.
  double clean_measure() const noexcept;
  // Probability of the set after a mean shift of lambda in score space.
  double shifted_measure(double lambda) const;

  // Set intersected with the band (lo, hi].
  QuantileIntervalSet clipped(double lo, double hi) const;
  // Set minus another set.
  QuantileIntervalSet minus(const QuantileIntervalSet& other) const;

  // Length of the part of the set at or below x.
  double measure_below(double x) const noexcept;
  // Inverse of measure_below along the set: the position p with exactly
  // `measure` of the set below p. Clamped to the set's extremes.
  double position_at_measure(double measure) const noexcept;

 private:
  std::vector<QuantileInterval> intervals_;
};

// A full quantile-space classifier: regions[label-1] is that label's set and
// the regions partition (0,1] up to measure zero.
struct WorstCaseClassifier {
  Label target_label = 0;
  std::vector<QuantileIntervalSet> regions;

  const QuantileIntervalSet& region_for(Label label) const {
    return regions.at(static_cast<std::size_t>(label - 1));
  }
};

// Builds the adversarial classifier for the given bounds at shift lambda
// (in units of sigma, i.e. lambda = ||delta|| / sigma >= 0). The target
// label receives exactly its lower bound of clean mass at the bottom of
// (0,1]; the k strongest competitors receive their upper bounds of clean
// mass carved from the top so that each of them captures at least the
// critical share of shifted mass; the rest of the labels fill the middle.
//
// Requires feasible bounds: lower + (sum of the k largest uppers) <= 1 and
// lower + (sum of all uppers) >= 1. Throws std::invalid_argument naming the
// violated inequality otherwise.
WorstCaseClassifier construct_worst_case(const ProbabilityBounds& bounds,
                                         int k, double lambda);

struct ViolationReport {
  bool consistent = false;  // clean measures respect the bounds
  bool ejected = false;     // target's shifted mass below the k-th competitor
};

// Checks a quantile-space classifier against bounds at shift lambda:
// `consistent` requires the target's clean mass >= lower and every other
// label's clean mass <= its upper (tolerance 1e-9); `ejected` requires the
// target's shifted mass to be strictly below the k-th largest competitor's.
ViolationReport verify_violation_report(const WorstCaseClassifier& classifier,
                                        const ProbabilityBounds& bounds, int k,
                                        double lambda, Label target);

// True iff the classifier is consistent with the bounds and ejects the
// target from the top k at shift lambda.
bool verify_violation(const WorstCaseClassifier& classifier,
                      const ProbabilityBounds& bounds, int k, double lambda,
                      Label target);

}  // namespace topkcert
