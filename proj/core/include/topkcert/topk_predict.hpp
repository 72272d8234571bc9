#pragma once

#include <cstdint>
#include <vector>

#include "topkcert/smoothing.hpp"

// Abstention-based top-k prediction for a smoothed classifier. The k
// predicted labels are the most frequent under noise, but each is admitted
// only if it beats the next-ranked label in a two-sided binomial test on
// their head-to-head counts; otherwise the procedure abstains. The returned
// set is wrong (not the true top-k) with probability at most alpha.

namespace topkcert {

struct PredictionResult {
  bool abstained = true;
  std::vector<Label> labels;    // admitted labels, most frequent first
  std::vector<double> pvalues;  // head-to-head p-values, one per tested rank
};

struct PredictParams {
  int k = 1;
  std::int64_t n = 100000;
  double alpha = 0.001;
  std::uint64_t seed = 0;
};

// Samples n noisy copies of the point, ranks labels by count (ties broken
// uniformly at random), and admits ranks 1..k while each two-sided binomial
// test of rank t against rank t+1 at p0 = 1/2 rejects at level alpha. Stops
// and abstains at the first rank that fails; labels and pvalues then hold
// the partial prefix.
PredictionResult predict_topk(const BaseClassifier& classifier,
                              const ExamplePoint& point,
                              const NoiseModel& noise,
                              const PredictParams& params);

}  // namespace topkcert
