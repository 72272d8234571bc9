#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Gaussian randomized smoothing around a base classifier: isotropic noise
// model, Monte Carlo label counting, and a synthetic classifier whose label
// distribution under noise is known exactly (the workhorse for experiments
// and statistical tests).
//
// Labels are 1-based integers in {1, ..., label_count}.

namespace topkcert {

using Label = int;
using ExamplePoint = std::vector<double>;

class NoiseModel {
 public:
  // Isotropic Gaussian N(0, sigma^2 I); sigma must be positive and finite.
  explicit NoiseModel(double sigma);
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

class BaseClassifier {
 public:
  virtual ~BaseClassifier() = default;
  virtual int label_count() const = 0;
  // Deterministic total function of the input; returns a label in
  // {1, ..., label_count()}. Must be safe for concurrent read-only use.
  virtual Label classify(const ExamplePoint& point) const = 0;
};

// Label histogram from one sampling pass; counts sum to the sample size.
struct CountVector {
  std::vector<std::int64_t> counts;  // index label-1

  int label_count() const noexcept { return static_cast<int>(counts.size()); }
  std::int64_t count_for(Label label) const {
    return counts.at(static_cast<std::size_t>(label - 1));
  }
  std::int64_t total() const noexcept;
};

namespace detail {

// SplitMix64 finalizer; the backbone of all seed derivation below.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Decorrelated sub-seed for a numbered stream of a run seed. Chunked
// sampling, tie-breaking and per-example batching all draw their seeds
// through this, so results never depend on thread scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Uniform in (0,1) from 53 random bits; never returns an endpoint.
double uniform01(std::uint64_t bits) noexcept;

}  // namespace detail

// Draws n perturbed copies x + eps, eps ~ N(0, sigma^2 I), classifies each,
// and returns the label histogram. Sampling is chunked with per-chunk
// sub-seeds derived from (seed, chunk index) and chunks are merged in index
// order, so the result is identical no matter how many threads execute the
// chunks. Normal variates come from the library's own quantile applied to
// mt19937_64 output ("mt19937_64/inverse-cdf-normal"), which keeps streams
// reproducible across platforms.
CountVector sample_under_noise(const BaseClassifier& classifier,
                               const ExamplePoint& point,
                               const NoiseModel& noise, std::int64_t n,
                               std::uint64_t seed);

// The m labels with the largest counts, ordered by decreasing count. Ties
// are broken uniformly at random by the seeded generator: every ordering of
// tied labels is equally likely.
std::vector<Label> top_indices(const CountVector& counts, int m,
                               std::uint64_t seed);

// Classifier over a table of examples with known label distributions. Row e
// is anchored at a point whose first coordinate is e * spacing with spacing
// large relative to sigma, so noise never wanders into a neighbouring row's
// territory (crossing mass ~ Phi(-20), zero in double precision). A sample is
// labelled by hashing the perturbed input into a uniform and inverting the
// row's CDF: a deterministic function of the input that realizes the stored
// label probabilities exactly under the configured noise.
class SyntheticTabularClassifier final : public BaseClassifier {
 public:
  // Each row holds label_count probabilities summing to 1 (within 1e-12).
  SyntheticTabularClassifier(int label_count,
                             std::vector<std::vector<double>> rows,
                             const NoiseModel& noise, int dim = 1,
                             std::uint64_t label_seed = 0);

  int label_count() const override { return label_count_; }
  Label classify(const ExamplePoint& point) const override;

  std::size_t row_count() const noexcept { return cumulative_.size(); }
  // The unperturbed input that selects row `row`.
  ExamplePoint anchor(std::size_t row) const;
  double anchor_spacing() const noexcept { return spacing_; }

 private:
  int label_count_;
  int dim_;
  double spacing_;
  std::uint64_t label_seed_;
  std::vector<std::vector<double>> cumulative_;  // per-row CDF over labels
};

}  // namespace topkcert
