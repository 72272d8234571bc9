#include "topkcert/confidence_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "topkcert/special_functions.hpp"

namespace topkcert {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("topkcert: " + msg);
}

void check_inputs(const CountVector& counts, Label target, double alpha) {
  const int c = counts.label_count();
  if (c < 2) fail("bounds need at least two labels");
  if (target < 1 || target > c) fail("target label out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
  for (std::int64_t v : counts.counts) {
    if (v < 0) fail("negative count");
  }
  if (counts.total() < 1) fail("count vector is empty");
}

// One-sided Clopper-Pearson lower bound on p from s successes in n trials at
// level alpha: the alpha-quantile of Beta(s, n - s + 1), with the limit 0 at
// s = 0 where the Beta shape degenerates.
double cp_lower(std::int64_t s, std::int64_t n, double alpha) {
  if (s == 0) return 0.0;
  return beta_quantile(alpha, static_cast<double>(s),
                       static_cast<double>(n - s + 1));
}

// One-sided Clopper-Pearson upper bound: the (1-alpha)-quantile of
// Beta(s + 1, n - s), with the limit 1 at s = n.
double cp_upper(std::int64_t s, std::int64_t n, double alpha) {
  if (s == n) return 1.0;
  return beta_quantile(1.0 - alpha, static_cast<double>(s + 1),
                       static_cast<double>(n - s));
}

}  // namespace

std::string to_string(BoundMethod method) {
  return method == BoundMethod::BinoCP ? "binocp" : "simuem";
}

BoundMethod bound_method_from_string(const std::string& name) {
  if (name == "binocp") return BoundMethod::BinoCP;
  if (name == "simuem") return BoundMethod::SimuEM;
  fail("unknown bound method '" + name + "' (expected binocp or simuem)");
}

ProbabilityBounds binocp_bounds(const CountVector& counts, Label target,
                                double alpha) {
  check_inputs(counts, target, alpha);
  const std::int64_t n = counts.total();

  ProbabilityBounds out;
  out.target_label = target;
  out.alpha = alpha;
  out.method = BoundMethod::BinoCP;
  out.lower = cp_lower(counts.count_for(target), n, alpha);
  out.upper.assign(counts.counts.size(), 1.0 - out.lower);
  out.upper[static_cast<std::size_t>(target - 1)] =
      std::numeric_limits<double>::quiet_NaN();
  return out;
}

ProbabilityBounds simuem_bounds(const CountVector& counts, Label target,
                                double alpha) {
  check_inputs(counts, target, alpha);
  const std::int64_t n = counts.total();
  const int c = counts.label_count();
  const double level = alpha / static_cast<double>(c);

  ProbabilityBounds out;
  out.target_label = target;
  out.alpha = alpha;
  out.method = BoundMethod::SimuEM;
  out.lower = cp_lower(counts.count_for(target), n, level);
  out.upper.resize(counts.counts.size());
  for (Label i = 1; i <= c; ++i) {
    out.upper[static_cast<std::size_t>(i - 1)] =
        i == target ? std::numeric_limits<double>::quiet_NaN()
                    : cp_upper(counts.count_for(i), n, level);
  }
  return out;
}

PrefixUpperBounds prefix_upper_bounds(const ProbabilityBounds& bounds, int k,
                                      std::uint64_t seed) {
  const int c = bounds.label_count();
  if (c < 2) fail("bounds need at least two labels");
  if (k < 1 || k > c - 1) {
    fail("prefix bounds need 1 <= k <= label_count - 1, got k=" +
         std::to_string(k));
  }
  if (!(bounds.lower >= 0.0 && bounds.lower <= 1.0)) {
    fail("lower bound outside [0,1]");
  }

  std::vector<double> competitors;
  competitors.reserve(static_cast<std::size_t>(c - 1));
  for (Label i = 1; i <= c; ++i) {
    if (i == bounds.target_label) continue;
    const double u = bounds.upper_for(i);
    if (!(u >= 0.0 && u <= 1.0)) fail("upper bound outside [0,1]");
    competitors.push_back(u);
  }

  // Uniform tie-break via shuffle + stable sort, mirroring top_indices. Tied
  // values cannot change any prefix sum; the seed only decides which equal
  // number is "kept".
  std::mt19937_64 rng(detail::splitmix64(seed));
  std::shuffle(competitors.begin(), competitors.end(), rng);
  std::stable_sort(competitors.begin(), competitors.end(),
                   [](double a, double b) { return a > b; });
  competitors.resize(static_cast<std::size_t>(k));  // the k largest, descending

  PrefixUpperBounds out;
  out.values.resize(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (int t = 1; t <= k; ++t) {
    // t smallest of the k largest = the last t entries of the descending list.
    sum += competitors[static_cast<std::size_t>(k - t)];
    out.values[static_cast<std::size_t>(t - 1)] =
        std::min(sum, 1.0 - bounds.lower);
  }
  return out;
}

}  // namespace topkcert
