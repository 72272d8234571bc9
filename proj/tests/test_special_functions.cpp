#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "support/oracles.hpp"
#include "topkcert/special_functions.hpp"

using namespace topkcert;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("special_functions") {

TEST_CASE("normal cdf at reference points") {
  CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std_normal_cdf(-kInf) == 0.0);
  CHECK(std_normal_cdf(kInf) == 1.0);
  // Independent series/continued-fraction evaluation of the same point.
  CHECK(std_normal_cdf(1.96) ==
        doctest::Approx(oracle::std_normal_cdf(1.96)).epsilon(1e-13));
  CHECK(std_normal_cdf(1.96) == doctest::Approx(0.9750021).epsilon(1e-6));
  CHECK(std::fabs(std_normal_cdf(-0.7) + std_normal_cdf(0.7) - 1.0) <= 1e-12);
}

TEST_CASE("normal cdf matches the reference across the line") {
  for (double x = -8.0; x <= 8.0; x += 0.173) {
    CHECK(std::fabs(std_normal_cdf(x) - oracle::std_normal_cdf(x)) <= 1e-13);
  }
}

TEST_CASE("normal quantile endpoints and reference point") {
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std_normal_quantile(0.0) == -kInf);
  CHECK(std_normal_quantile(1.0) == kInf);
  CHECK(std_normal_quantile(0.975) ==
        doctest::Approx(oracle::std_normal_quantile(0.975)).epsilon(1e-9));
  CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(std_normal_quantile(std_normal_cdf(1.234)) ==
        doctest::Approx(1.234).epsilon(1e-9));
  CHECK_THROWS_AS(std_normal_quantile(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(std_normal_quantile(1.1), std::invalid_argument);
  CHECK_THROWS_AS(std_normal_quantile(std::nan("")), std::invalid_argument);
}

TEST_CASE("quantile round trip over deterministic and random grids") {
  for (double p : {1e-15, 1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-6,
                   1.0 - 1e-12, 1.0 - 1e-15}) {
    CHECK(std::fabs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-12);
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(1e-9, 1.0 - 1e-9);
  for (int i = 0; i < 10000; ++i) {
    const double p = unit(rng);
    CHECK(std::fabs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-10);
  }
}

TEST_CASE("cdf and quantile are monotone on sorted random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> span(-9.0, 9.0);
  std::vector<double> xs(2000);
  for (double& x : xs) x = span(rng);
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    CHECK(std_normal_cdf(xs[i]) >= std_normal_cdf(xs[i - 1]));
  }
  std::uniform_real_distribution<double> unit(1e-9, 1.0 - 1e-9);
  std::vector<double> ps(2000);
  for (double& p : ps) p = unit(rng);
  std::sort(ps.begin(), ps.end());
  for (std::size_t i = 1; i < ps.size(); ++i) {
    CHECK(std_normal_quantile(ps[i]) >= std_normal_quantile(ps[i - 1]));
  }
}

TEST_CASE("beta quantile closed forms and oracle point") {
  CHECK(beta_quantile(0.3, 1.0, 1.0) == doctest::Approx(0.3).epsilon(1e-12));
  // Beta(n, 1) has CDF x^n, so the quantile is q^(1/n).
  CHECK(beta_quantile(0.001, 100.0, 1.0) ==
        doctest::Approx(std::pow(0.001, 1.0 / 100.0)).epsilon(1e-10));
  CHECK(beta_quantile(0.001, 100.0, 1.0) ==
        doctest::Approx(0.9332543).epsilon(1e-6));
  const double expected = oracle::beta_quantile(0.025, 5.0, 6.0);
  CHECK(beta_quantile(0.025, 5.0, 6.0) ==
        doctest::Approx(expected).epsilon(1e-8));
  CHECK(beta_quantile(0.0, 3.0, 4.0) == 0.0);
  CHECK(beta_quantile(1.0, 3.0, 4.0) == 1.0);
  CHECK_THROWS_AS(beta_quantile(0.5, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(beta_quantile(0.5, 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("beta quantile round trips against the quadrature oracle") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> shape(0.5, 200.0);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  for (int i = 0; i < 100; ++i) {
    const double a = shape(rng);
    const double b = shape(rng);
    const double q = unit(rng);
    const double x = beta_quantile(q, a, b);
    CHECK(std::fabs(regularized_incomplete_beta(x, a, b) - q) <= 1e-10);
    CHECK(std::fabs(oracle::regularized_incomplete_beta(x, a, b) - q) <= 1e-8);
  }
}

TEST_CASE("beta quantile survives the extreme shapes of sampling bounds") {
  // Shapes like Beta(100000, 1): quantiles crowd against 1.
  const double x = beta_quantile(0.001, 100000.0, 1.0);
  CHECK(x == doctest::Approx(std::pow(0.001, 1e-5)).epsilon(1e-12));
  const double y = beta_quantile(0.9999, 99990.0, 11.0);
  CHECK(std::fabs(regularized_incomplete_beta(y, 99990.0, 11.0) - 0.9999) <=
        1e-10);
}

TEST_CASE("beta quantile is monotone in q") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  std::vector<double> qs(300);
  for (double& q : qs) q = unit(rng);
  std::sort(qs.begin(), qs.end());
  for (std::size_t i = 1; i < qs.size(); ++i) {
    CHECK(beta_quantile(qs[i], 3.5, 7.25) >=
          beta_quantile(qs[i - 1], 3.5, 7.25));
  }
}

TEST_CASE("binomial p-value reference points") {
  // Observation at the mode: every outcome is at most as likely, sum = 1.
  CHECK(binom_two_sided_pvalue(5, 10, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  // Extreme tail: only the two endpoint outcomes qualify.
  CHECK(binom_two_sided_pvalue(10, 10, 0.5) ==
        doctest::Approx(0.001953125).epsilon(1e-12));
  // (56 + 56) / 1024: outcomes {0,1,2} and {8,9,10}.
  CHECK(binom_two_sided_pvalue(8, 10, 0.5) ==
        doctest::Approx(0.109375).epsilon(1e-12));
  CHECK(binom_two_sided_pvalue(8, 10, 0.5) ==
        doctest::Approx(oracle::binom_two_sided_pvalue(8, 10, 0.5))
            .epsilon(1e-12));
  CHECK_THROWS_AS(binom_two_sided_pvalue(3, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binom_two_sided_pvalue(-1, 10, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binom_two_sided_pvalue(11, 10, 0.5), std::invalid_argument);
}

TEST_CASE("binomial p-value agrees with enumeration away from 1/2") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 400);
    const std::int64_t s = static_cast<std::int64_t>(rng() % (n + 1));
    const double p0 = unit(rng);
    const double got = binom_two_sided_pvalue(s, n, p0);
    const double want = oracle::binom_two_sided_pvalue(s, n, p0);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("binomial p-value is exactly symmetric at p0 = 1/2") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 500; ++i) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 3000);
    const std::int64_t s = static_cast<std::int64_t>(rng() % (n + 1));
    CHECK(binom_two_sided_pvalue(s, n, 0.5) ==
          binom_two_sided_pvalue(n - s, n, 0.5));
  }
}

TEST_CASE("degenerate p0 handled without log underflow") {
  CHECK(binom_two_sided_pvalue(0, 10, 0.0) == 1.0);
  CHECK(binom_two_sided_pvalue(3, 10, 0.0) == 0.0);
  CHECK(binom_two_sided_pvalue(10, 10, 1.0) == 1.0);
  CHECK(binom_two_sided_pvalue(9, 10, 1.0) == 0.0);
}

}  // TEST_SUITE
