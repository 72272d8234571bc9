#include "topkcert/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace topkcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kSqrt2Pi = 2.50662827463100050242;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("topkcert: " + msg);
}

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(std::string(name) + " must be a probability in [0,1], got " +
         std::to_string(p));
  }
}

// log Gamma. std::lgamma writes the global signgam on glibc, which is a data
// race under concurrent certification; lgamma_r avoids it.
double log_gamma(double x) {
#ifdef __GLIBC__
  int sign = 0;
  return lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

// Continued fraction for the incomplete beta function, evaluated with the
// modified Lentz algorithm. Textbook form: converges for x < (a+1)/(a+b+2);
// the caller flips to the symmetric case otherwise. Iteration count grows
// roughly with sqrt(max(a,b)), hence the generous cap.
double beta_continued_fraction(double x, double a, double b) {
  constexpr double eps = 1e-15;
  constexpr double fpmin = 1e-300;
  constexpr int max_iter = 5000;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double std_normal_cdf(double x) noexcept {
  // 0.5 * erfc(-x / sqrt(2)); erfc keeps full relative accuracy in the lower
  // tail where 1 - Phi would cancel.
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_quantile(double p) {
  require_probability(p, "p");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;

  // Acklam's rational approximation to the normal quantile (relative error
  // ~1.15e-9), in the usual three regions.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley polish against the erfc-based CDF brings the approximation to
  // machine precision. Skipped in the far tails where exp(x^2/2) overflows;
  // there the rational approximation alone is already sharper than any
  // downstream tolerance.
  if (x * x < 1400.0) {
    const double e = std_normal_cdf(x) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    fail("beta shape parameters must be positive, got a=" + std::to_string(a) +
         " b=" + std::to_string(b));
  }
  require_probability(x, "x");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                   beta_continued_fraction(1.0 - x, b, a) / b;
}

double beta_quantile(double q, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    fail("beta shape parameters must be positive, got a=" + std::to_string(a) +
         " b=" + std::to_string(b));
  }
  require_probability(q, "q");
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;

  // Safeguarded Newton on I_x(a,b) - q with a shrinking bracket; falls back
  // to bisection whenever the Newton step leaves the bracket or the density
  // underflows. The CDF is strictly increasing, so the bracket never lies.
  const double lbeta = log_beta(a, b);
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  double f = regularized_incomplete_beta(x, a, b) - q;
  for (int iter = 0; iter < 200; ++iter) {
    if (f > 0.0) {
      hi = x;
    } else if (f < 0.0) {
      lo = x;
    } else {
      return x;
    }
    const double log_pdf =
        (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
    double next;
    if (log_pdf > -700.0) {
      next = x - f / std::exp(log_pdf);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    if (next == x || hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * x) {
      break;
    }
    x = next;
    f = regularized_incomplete_beta(x, a, b) - q;
    if (std::fabs(f) <= 1e-13) break;
  }
  return x;
}

double binom_two_sided_pvalue(std::int64_t successes, std::int64_t trials,
                              double p0) {
  if (trials < 1) fail("binomial test needs at least one trial");
  if (successes < 0 || successes > trials) {
    fail("successes must lie in [0, trials]");
  }
  require_probability(p0, "p0");
  if (p0 == 0.0) return successes == 0 ? 1.0 : 0.0;
  if (p0 == 1.0) return successes == trials ? 1.0 : 0.0;

  const auto n = static_cast<std::size_t>(trials);

  // log C(n, j) built incrementally; evaluated at min(j, n-j) so that the
  // value is bit-identical for j and n-j. Together with the p0 == 1/2 branch
  // below this makes the p-value exactly symmetric under s <-> n-s.
  std::vector<double> log_choose(n / 2 + 1);
  log_choose[0] = 0.0;
  for (std::size_t j = 0; j + 1 < log_choose.size(); ++j) {
    log_choose[j + 1] = log_choose[j] + std::log(static_cast<double>(n - j) /
                                                 static_cast<double>(j + 1));
  }
  const double log_p = std::log(p0);
  const double log_1mp = std::log1p(-p0);
  auto log_pmf = [&](std::size_t j) {
    const double lc = log_choose[std::min(j, n - j)];
    if (p0 == 0.5) {
      return lc - static_cast<double>(n) * 0.6931471805599453;
    }
    return lc + static_cast<double>(j) * log_p +
           static_cast<double>(n - j) * log_1mp;
  };

  // "minlike": include every outcome at most as likely as the observed one.
  // The relative slack absorbs roundoff in ties, as in the standard exact
  // binomial test implementations.
  const double threshold =
      log_pmf(static_cast<std::size_t>(successes)) + std::log1p(1e-7);
  double total = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double lp = log_pmf(j);
    if (lp <= threshold) total += std::exp(lp);
  }
  return std::min(total, 1.0);
}

}  // namespace topkcert
