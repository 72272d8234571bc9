#pragma once

#include <cstdint>

// Scalar probability kernels used by every statistical layer above this one.
// Probabilities are plain doubles in [0,1]; quantile-scale values ("scores")
// are extended reals, so +/-infinity is a legitimate input and output and is
// propagated through arithmetic instead of being special-cased by callers.

namespace topkcert {

// Standard normal CDF. Total on the extended reals: -inf -> 0, +inf -> 1.
// Absolute error is well below 1e-12 over the whole line (erfc based).
double std_normal_cdf(double x) noexcept;

// Standard normal quantile. p must lie in [0,1] (0 -> -inf, 1 -> +inf).
// Rational initial approximation polished by one Halley step against the
// CDF above; round-trips satisfy |cdf(quantile(p)) - p| <= 1e-12 for
// p in [1e-15, 1 - 1e-15]. Throws std::invalid_argument on NaN or p
// outside [0,1].
double std_normal_quantile(double p);

// Regularized incomplete beta function I_x(a, b) for a > 0, b > 0 and
// x in [0,1], evaluated by continued fraction. Throws std::invalid_argument
// on invalid shapes or x outside [0,1].
double regularized_incomplete_beta(double x, double a, double b);

// Quantile of the Beta(a, b) distribution: the x with I_x(a, b) = q.
// Safeguarded Newton iteration bracketed inside [0,1]; the result satisfies
// |I_x(a, b) - q| <= 1e-10 across shape parameters up to ~1e5.
// Throws std::invalid_argument on invalid shapes or q outside [0,1].
double beta_quantile(double q, double a, double b);

// Exact two-sided binomial test p-value for observing `successes` out of
// `trials` under success probability p0. Uses the "minlike" convention:
// the p-value sums the probabilities of every outcome whose likelihood does
// not exceed that of the observed count (ties included, with the customary
// 1e-7 relative slack against roundoff). Symmetric at p0 = 1/2:
// pvalue(s, n) == pvalue(n - s, n) exactly.
double binom_two_sided_pvalue(std::int64_t successes, std::int64_t trials,
                              double p0);

}  // namespace topkcert
