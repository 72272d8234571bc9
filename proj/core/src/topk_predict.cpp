#include "topkcert/topk_predict.hpp"

#include <stdexcept>
#include <string>

#include "topkcert/special_functions.hpp"

namespace topkcert {

PredictionResult predict_topk(const BaseClassifier& classifier,
                              const ExamplePoint& point,
                              const NoiseModel& noise,
                              const PredictParams& params) {
  const int c = classifier.label_count();
  if (params.k < 1 || params.k > c - 1) {
    throw std::invalid_argument("topkcert: predict needs 1 <= k <= " +
                                std::to_string(c - 1));
  }
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw std::invalid_argument("topkcert: alpha must lie in (0,1)");
  }

  const CountVector counts =
      sample_under_noise(classifier, point, noise, params.n,
                         detail::derive_seed(params.seed, 0));
  const std::vector<Label> ranked =
      top_indices(counts, params.k + 1, detail::derive_seed(params.seed, 1));

  PredictionResult result;
  result.labels.reserve(static_cast<std::size_t>(params.k));
  result.pvalues.reserve(static_cast<std::size_t>(params.k));
  for (int t = 0; t < params.k; ++t) {
    const std::int64_t lead = counts.count_for(ranked[static_cast<std::size_t>(t)]);
    const std::int64_t runner =
        counts.count_for(ranked[static_cast<std::size_t>(t + 1)]);
    // No observations for either label means no evidence of separation.
    const double pvalue =
        lead + runner == 0
            ? 1.0
            : binom_two_sided_pvalue(lead, lead + runner, 0.5);
    result.pvalues.push_back(pvalue);
    if (pvalue > params.alpha) {
      result.abstained = true;
      return result;  // labels/pvalues hold the prefix admitted so far
    }
    result.labels.push_back(ranked[static_cast<std::size_t>(t)]);
  }
  result.abstained = false;
  return result;
}

}  // namespace topkcert
