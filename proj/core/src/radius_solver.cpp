#include "topkcert/radius_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "topkcert/special_functions.hpp"

namespace topkcert {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("topkcert: " + msg);
}

void check_solver_inputs(double lower, double prefix_upper, int t, double sigma) {
  if (!(lower >= 0.0 && lower <= 1.0)) fail("lower outside [0,1]");
  if (!(prefix_upper >= 0.0 && prefix_upper <= 1.0)) {
    fail("prefix upper outside [0,1]");
  }
  if (t < 1) fail("prefix size t must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail("sigma must be positive");
}

constexpr double kCapMultiple = 100.0;

}  // namespace

double radius_equation_lhs(double radius, double lower, double prefix_upper,
                           int t, double sigma) {
  check_solver_inputs(lower, prefix_upper, t, sigma);
  const double shift = radius / sigma;
  // Quantiles of 0 and 1 are -inf/+inf; the CDF then saturates, which is
  // exactly the right limit for degenerate bounds.
  const double target_term = std_normal_cdf(std_normal_quantile(lower) - shift);
  const double runner_term =
      std_normal_cdf(std_normal_quantile(prefix_upper) + shift);
  return target_term - runner_term / static_cast<double>(t);
}

RadiusSolution solve_radius_t(double lower, double prefix_upper, int t,
                              double sigma, double width_tol) {
  check_solver_inputs(lower, prefix_upper, t, sigma);
  if (!(width_tol > 0.0)) fail("width tolerance must be positive");

  const double cap = kCapMultiple * sigma;

  // Degenerate endpoints make the equation constant on one side; report the
  // saturated cap in the root's direction instead of bisecting forever.
  if (lower <= 0.0) return {-cap, true};            // never certifiable
  if (lower >= 1.0) return {cap, true};             // certified at any radius
  if (prefix_upper <= 0.0) return {cap, true};      // no competitor mass
  if (prefix_upper >= 1.0 && t == 1) return {-cap, true};

  auto lhs = [&](double r) {
    const double shift = r / sigma;
    return std_normal_cdf(std_normal_quantile(lower) - shift) -
           std_normal_cdf(std_normal_quantile(prefix_upper) + shift) /
               static_cast<double>(t);
  };

  // Establish a bracket [lo, hi] with lhs(lo) >= 0 > lhs(hi), doubling
  // outward from [0, sigma] (mirrored when the root is negative).
  double lo;
  double hi;
  if (lhs(0.0) >= 0.0) {
    lo = 0.0;
    hi = sigma;
    while (lhs(hi) >= 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > cap) return {cap, true};
    }
  } else {
    hi = 0.0;
    lo = -sigma;
    while (lhs(lo) < 0.0) {
      hi = lo;
      lo *= 2.0;
      if (lo < -cap) return {-cap, true};
    }
  }

  while (hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // lo keeps lhs(lo) >= 0 and the root lies in [lo, lo + width_tol].
  return {lo, false};
}

RadiusCertificate certify_from_bounds(const ProbabilityBounds& bounds, int k,
                                      double sigma, double mu,
                                      std::uint64_t seed) {
  const PrefixUpperBounds prefix = prefix_upper_bounds(bounds, k, seed);

  RadiusCertificate cert;
  cert.per_t.resize(static_cast<std::size_t>(k));
  cert.width_tol = mu;
  cert.radius_lower = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= k; ++t) {
    const RadiusSolution sol = solve_radius_t(
        bounds.lower, prefix.values[static_cast<std::size_t>(t - 1)], t, sigma,
        mu);
    cert.per_t[static_cast<std::size_t>(t - 1)] = sol.value;
    if (sol.value > cert.radius_lower) {
      cert.radius_lower = sol.value;
      cert.best_t = t;
      cert.saturated = sol.saturated;
    }
  }
  cert.abstained = !(cert.radius_lower > 0.0);
  return cert;
}

RadiusCertificate certify(const BaseClassifier& classifier,
                          const ExamplePoint& point, Label target,
                          const NoiseModel& noise,
                          const CertifyParams& params) {
  if (params.k < 1 || params.k > classifier.label_count() - 1) {
    fail("certify needs 1 <= k <= label_count - 1");
  }
  const CountVector counts =
      sample_under_noise(classifier, point, noise, params.n,
                         detail::derive_seed(params.seed, 0));
  const ProbabilityBounds bounds =
      params.method == BoundMethod::BinoCP
          ? binocp_bounds(counts, target, params.alpha)
          : simuem_bounds(counts, target, params.alpha);
  return certify_from_bounds(bounds, params.k, noise.sigma(), params.mu,
                             detail::derive_seed(params.seed, 1));
}

}  // namespace topkcert
