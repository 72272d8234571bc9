#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "support/oracles.hpp"
#include "topkcert/radius_solver.hpp"
#include "topkcert/special_functions.hpp"

using namespace topkcert;

namespace {

class ConstantClassifier final : public BaseClassifier {
 public:
  ConstantClassifier(int label_count, Label always)
      : label_count_(label_count), always_(always) {}
  int label_count() const override { return label_count_; }
  Label classify(const ExamplePoint&) const override { return always_; }

 private:
  int label_count_;
  Label always_;
};

ProbabilityBounds make_bounds(double lower, std::vector<double> uppers,
                              Label target = 1) {
  ProbabilityBounds bounds;
  bounds.target_label = target;
  bounds.lower = lower;
  bounds.alpha = 0.001;
  bounds.upper.assign(uppers.size() + 1,
                      std::numeric_limits<double>::quiet_NaN());
  std::size_t next = 0;
  for (Label i = 1; i <= static_cast<Label>(bounds.upper.size()); ++i) {
    if (i == target) continue;
    bounds.upper[static_cast<std::size_t>(i - 1)] = uppers[next++];
  }
  return bounds;
}

double closed_form_radius(double lower, double upper, double sigma) {
  return 0.5 * sigma *
         (std_normal_quantile(lower) - std_normal_quantile(upper));
}

}  // namespace

TEST_SUITE("radius_solver") {

TEST_CASE("equation lhs at zero radius is the probability gap") {
  CHECK(radius_equation_lhs(0.0, 0.5, 0.5, 1, 1.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(radius_equation_lhs(0.0, 0.8, 0.2, 1, 0.5) ==
        doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("equation lhs vanishes at the closed-form root") {
  const double root = closed_form_radius(0.8, 0.2, 0.5);
  CHECK(root == doctest::Approx(0.4208106).epsilon(1e-6));
  CHECK(std::fabs(radius_equation_lhs(root, 0.8, 0.2, 1, 0.5)) <= 1e-6);
}

TEST_CASE("equation lhs saturates for degenerate probabilities") {
  CHECK(radius_equation_lhs(1.0, 0.0, 0.3, 1, 1.0) ==
        doctest::Approx(-std_normal_cdf(std_normal_quantile(0.3) + 1.0))
            .epsilon(1e-12));
  CHECK(radius_equation_lhs(1.0, 1.0, 0.3, 1, 1.0) ==
        doctest::Approx(1.0 - std_normal_cdf(std_normal_quantile(0.3) + 1.0))
            .epsilon(1e-12));
  CHECK(radius_equation_lhs(0.5, 0.8, 0.0, 2, 1.0) ==
        doctest::Approx(std_normal_cdf(std_normal_quantile(0.8) - 0.5))
            .epsilon(1e-12));
}

TEST_CASE("equation lhs is strictly decreasing in the radius") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> lower_draw(0.2, 0.9);
  std::uniform_real_distribution<double> upper_draw(0.05, 0.6);
  std::uniform_real_distribution<double> sigma_draw(0.25, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    const double lower = lower_draw(rng);
    const double upper = upper_draw(rng);
    const double sigma = sigma_draw(rng);
    const int t = 1 + static_cast<int>(rng() % 5);
    double previous = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
      const double r = -sigma + 3.0 * sigma * i / 999.0;
      const double value = radius_equation_lhs(r, lower, upper, t, sigma);
      CHECK(value < previous);
      previous = value;
    }
  }
}

TEST_CASE("solver hits the closed form at mu 1e-9") {
  const RadiusSolution sol = solve_radius_t(0.8, 0.2, 1, 0.5, 1e-9);
  CHECK_FALSE(sol.saturated);
  CHECK(sol.value == doctest::Approx(0.4208106).epsilon(1e-6));
  CHECK(std::fabs(sol.value - closed_form_radius(0.8, 0.2, 0.5)) <=
        1e-9 + 1e-9);
}

TEST_CASE("equal probabilities give a zero radius") {
  for (double p : {0.2, 0.5, 0.8}) {
    const RadiusSolution sol = solve_radius_t(p, p, 1, 1.3, 1e-7);
    CHECK(std::fabs(sol.value) <= 1e-7);
  }
}

TEST_CASE("coarse solve agrees with the fine solve within its tolerance") {
  const RadiusSolution coarse = solve_radius_t(0.6, 0.4, 2, 1.0, 1e-5);
  const RadiusSolution fine = solve_radius_t(0.6, 0.4, 2, 1.0, 1e-9);
  CHECK(std::fabs(coarse.value - fine.value) <= 1e-5);
}

TEST_CASE("sandwich contract on random instances") {
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  std::uniform_real_distribution<double> sigma_draw(0.25, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double lower = unit(rng);
    const double upper = unit(rng);
    const double sigma = sigma_draw(rng);
    const int t = 1 + static_cast<int>(rng() % 5);
    const double mu = 1e-5;
    const RadiusSolution sol = solve_radius_t(lower, upper, t, sigma, mu);
    if (sol.saturated) continue;
    // lhs(R) >= 0 puts R at or below the root; lhs(R + mu) <= 0 puts the
    // root at or below R + mu.
    CHECK(radius_equation_lhs(sol.value, lower, upper, t, sigma) >= 0.0);
    CHECK(radius_equation_lhs(sol.value + mu, lower, upper, t, sigma) <= 0.0);
    const RadiusSolution fine = solve_radius_t(lower, upper, t, sigma, 1e-8);
    CHECK(fine.value - sol.value <= mu);
    CHECK(sol.value - fine.value <= 1e-8);
  }
}

TEST_CASE("negative roots follow the mirrored closed form") {
  const double expected = closed_form_radius(0.2, 0.6, 0.8);
  REQUIRE(expected < 0.0);
  const RadiusSolution sol = solve_radius_t(0.2, 0.6, 1, 0.8, 1e-8);
  CHECK(std::fabs(sol.value - expected) <= 1e-8 + 1e-9);
}

TEST_CASE("degenerate inputs saturate at the cap") {
  CHECK(solve_radius_t(0.0, 0.5, 1, 1.0, 1e-5).saturated);
  CHECK(solve_radius_t(0.0, 0.5, 1, 1.0, 1e-5).value < 0.0);
  CHECK(solve_radius_t(1.0, 0.5, 1, 1.0, 1e-5).saturated);
  CHECK(solve_radius_t(1.0, 0.5, 1, 1.0, 1e-5).value == 100.0);
  CHECK(solve_radius_t(0.5, 0.0, 3, 2.0, 1e-5).value == 200.0);
  CHECK(solve_radius_t(0.5, 1.0, 1, 1.0, 1e-5).value == -100.0);
}

TEST_CASE("solver validates inputs") {
  CHECK_THROWS_AS(solve_radius_t(1.5, 0.5, 1, 1.0, 1e-5),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_radius_t(0.5, 0.5, 0, 1.0, 1e-5),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_radius_t(0.5, 0.5, 1, 0.0, 1e-5),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_radius_t(0.5, 0.5, 1, 1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("certificate from bounds picks the best prefix size") {
  const ProbabilityBounds bounds =
      make_bounds(0.5, {0.25, 0.2, 0.15, 0.1, 0.05});
  const RadiusCertificate cert = certify_from_bounds(bounds, 3, 1.0, 1e-7);
  REQUIRE(cert.per_t.size() == 3);
  CHECK_FALSE(cert.abstained);
  double best = -std::numeric_limits<double>::infinity();
  int best_t = 0;
  for (int t = 1; t <= 3; ++t) {
    if (cert.per_t[static_cast<std::size_t>(t - 1)] > best) {
      best = cert.per_t[static_cast<std::size_t>(t - 1)];
      best_t = t;
    }
  }
  CHECK(cert.radius_lower == best);
  CHECK(cert.best_t == best_t);
  CHECK(cert.width_tol == 1e-7);
}

TEST_CASE("radius is non-decreasing in k at fixed bounds") {
  const ProbabilityBounds bounds =
      make_bounds(0.4, {0.25, 0.15, 0.1, 0.06, 0.04});
  double previous = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 5; ++k) {
    const RadiusCertificate cert = certify_from_bounds(bounds, k, 1.0, 1e-7);
    CHECK(cert.radius_lower >= previous - 1e-7);
    previous = cert.radius_lower;
  }
}

TEST_CASE("radius is monotone in the bounds themselves") {
  const double base =
      certify_from_bounds(make_bounds(0.5, {0.2, 0.15, 0.1}), 2, 1.0, 1e-7)
          .radius_lower;
  const double stronger_lower =
      certify_from_bounds(make_bounds(0.51, {0.2, 0.15, 0.1}), 2, 1.0, 1e-7)
          .radius_lower;
  const double weaker_upper =
      certify_from_bounds(make_bounds(0.5, {0.21, 0.15, 0.1}), 2, 1.0, 1e-7)
          .radius_lower;
  CHECK(stronger_lower >= base - 2e-7);
  CHECK(weaker_upper <= base + 2e-7);
}

TEST_CASE("doubling sigma doubles the radius") {
  const ProbabilityBounds bounds = make_bounds(0.7, {0.2, 0.15, 0.1});
  const double mu = 1e-7;
  const double at_sigma = certify_from_bounds(bounds, 2, 0.5, mu).radius_lower;
  const double at_twice = certify_from_bounds(bounds, 2, 1.0, mu).radius_lower;
  CHECK(std::fabs(at_twice - 2.0 * at_sigma) <= 2.0 * mu);
}

TEST_CASE("negative best radius abstains") {
  const RadiusCertificate cert =
      certify_from_bounds(make_bounds(0.3, {0.7}), 1, 1.0, 1e-6);
  CHECK(cert.abstained);
  CHECK(cert.radius_lower <= 0.0);
}

TEST_CASE("certify on a constant classifier matches the closed form") {
  const ConstantClassifier classifier(3, 2);
  const NoiseModel noise(0.5);
  CertifyParams params;
  params.k = 1;
  params.n = 100000;
  params.alpha = 0.001;
  params.mu = 1e-5;
  params.method = BoundMethod::BinoCP;
  params.seed = 3;
  const RadiusCertificate cert =
      certify(classifier, {0.0}, 2, noise, params);
  CHECK_FALSE(cert.abstained);
  // All 100000 samples land on the target: lower = 0.001^(1/n) and the
  // closed-form radius is sigma * quantile(lower) by symmetry of the bounds.
  const double lower = std::pow(0.001, 1e-5);
  const double expected =
      closed_form_radius(lower, 1.0 - lower, 0.5);
  CHECK(std::fabs(cert.radius_lower - expected) <= params.mu + 1e-9);
  CHECK(cert.radius_lower == doctest::Approx(1.906).epsilon(1e-3));
}

TEST_CASE("certify abstains when the target is never observed") {
  const ConstantClassifier classifier(3, 2);
  const NoiseModel noise(0.5);
  CertifyParams params;
  params.k = 1;
  params.n = 1000;
  params.alpha = 0.001;
  params.method = BoundMethod::BinoCP;
  const RadiusCertificate cert =
      certify(classifier, {0.0}, 1, noise, params);
  CHECK(cert.abstained);
}

TEST_CASE("certify is deterministic in the seed and validates k") {
  const ConstantClassifier classifier(4, 1);
  const NoiseModel noise(1.0);
  CertifyParams params;
  params.k = 2;
  params.n = 5000;
  params.alpha = 0.01;
  params.seed = 77;
  const RadiusCertificate a = certify(classifier, {1.0}, 1, noise, params);
  const RadiusCertificate b = certify(classifier, {1.0}, 1, noise, params);
  CHECK(a.radius_lower == b.radius_lower);
  CHECK(a.best_t == b.best_t);
  params.k = 4;
  CHECK_THROWS_AS(certify(classifier, {1.0}, 1, noise, params),
                  std::invalid_argument);
}

}  // TEST_SUITE
