#pragma once

#include <cstdint>
#include <vector>

#include "topkcert/confidence_bounds.hpp"
#include "topkcert/smoothing.hpp"

// Certified radius for top-k membership of a smoothed classifier. For each
// prefix size t the radius solves
//
//   Phi(Phi^-1(lower) - R/sigma) - Phi(Phi^-1(prefix_upper_t) + R/sigma)/t = 0,
//
// whose left side is decreasing in R, so a sign-preserving bisection brackets
// the unique root from below. The certificate is the best (largest) of the
// per-t lower bounds; the target label is certified to stay in the top k for
// every perturbation of norm below it.

namespace topkcert {

// Left side of the radius equation at radius R. Total in the probability
// endpoints: lower or prefix_upper of 0 or 1 push a quantile to +/-infinity
// and the term saturates at 0 or 1 accordingly.
double radius_equation_lhs(double radius, double lower, double prefix_upper,
                           int t, double sigma);

struct RadiusSolution {
  double value = 0.0;    // lower bound on the root
  bool saturated = false;  // bracket expansion hit the +/-100 sigma cap
};

// Bisects the radius equation for one prefix size t. The returned value R
// satisfies lhs(R) >= 0 and R <= root <= R + width_tol, i.e. it undershoots
// the exact root by less than width_tol. The initial bracket [0, sigma]
// (mirrored for negative roots) doubles outward until it straddles the root;
// if that walks past 100 sigma the bound is reported at the cap with the
// saturated flag set (degenerate inputs such as lower = 1 land here).
RadiusSolution solve_radius_t(double lower, double prefix_upper, int t,
                              double sigma, double width_tol);

struct RadiusCertificate {
  double radius_lower = 0.0;   // best per-t bound; meaningful when > 0
  std::vector<double> per_t;   // per-prefix-size bounds, index t-1
  int best_t = 0;              // prefix size attaining radius_lower
  bool abstained = true;       // radius_lower <= 0: nothing certified
  bool saturated = false;      // best per-t solve hit the bracket cap
  double width_tol = 0.0;      // bisection tolerance the bounds carry
};

struct CertifyParams {
  int k = 1;
  std::int64_t n = 100000;
  double alpha = 0.001;
  double mu = 1e-5;                           // bisection width tolerance
  BoundMethod method = BoundMethod::SimuEM;
  std::uint64_t seed = 0;
};

// Radius certificate from already-computed probability bounds: prefix sums
// over the strongest competitors, one bisection per prefix size, best bound
// wins. Abstains when no prefix size yields a positive radius.
RadiusCertificate certify_from_bounds(const ProbabilityBounds& bounds, int k,
                                      double sigma, double mu,
                                      std::uint64_t seed = 0);

// Full certification pipeline: sample n noisy copies of the point, bound the
// label probabilities at joint level 1 - alpha with the chosen method, and
// solve for the certified radius of the target label.
RadiusCertificate certify(const BaseClassifier& classifier,
                          const ExamplePoint& point, Label target,
                          const NoiseModel& noise, const CertifyParams& params);

}  // namespace topkcert
