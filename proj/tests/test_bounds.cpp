#include <cmath>
#include <vector>

#include "doctest.h"
#include "jumpcurve/bounds.hpp"

using namespace jumpcurve;

namespace {

// Independent minimizer for the Chernoff objective: coarse grid then golden
// section, no reuse of the closed form under test.
double chernoff_by_search(double c, double z, double y) {
  auto objective = [&](double tau) { return -tau * y + c * (std::exp(tau * z) - tau * z - 1.0); };
  double lo = 0.0, hi = 1.0;
  while (objective(hi * 1.5) < objective(hi)) hi *= 1.5;
  hi *= 1.5;  // the minimizer can sit between the last two probes
  double best = objective(0.0);
  double best_tau = 0.0;
  for (int k = 0; k <= 4000; ++k) {
    const double tau = hi * k / 4000.0;
    if (objective(tau) < best) {
      best = objective(tau);
      best_tau = tau;
    }
  }
  double a = std::max(lo, best_tau - hi / 4000.0), b = best_tau + hi / 4000.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (objective(x1) < objective(x2)) {
      b = x2;
      x2 = x1;
      x1 = b - phi * (b - a);
    } else {
      a = x1;
      x1 = x2;
      x2 = a + phi * (b - a);
    }
  }
  return objective((a + b) / 2.0);
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("poisson rate function at landmark points") {
    CHECK(poisson_cramer(0.0) == 0.0);
    CHECK(poisson_cramer(std::exp(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(poisson_cramer(1.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
    CHECK_THROWS_AS(poisson_cramer(-0.5), std::invalid_argument);
  }

  TEST_CASE("series and closed form agree across the crossover") {
    for (double u : {1e-6, 5e-5, 9.9e-5, 1.00001e-4, 2e-4, 1e-3}) {
      const long double ul = u;
      const long double exact = (1.0L + ul) * std::log1p(ul) - ul;
      CHECK(poisson_cramer(u) == doctest::Approx(static_cast<double>(exact)).epsilon(1e-10));
    }
  }

  TEST_CASE("chernoff closed form equals direct minimization") {
    const ChernoffResult unit = chernoff_exponent(1.0, 1.0, 1.0);
    CHECK(unit.value == doctest::Approx(-(2.0 * std::log(2.0) - 1.0)).epsilon(1e-14));
    CHECK(unit.tau_star == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    for (double c : {0.3, 1.0, 4.0}) {
      for (double z : {0.5, 1.0, 2.0}) {
        for (double y : {0.1, 1.0, 3.0}) {
          const ChernoffResult got = chernoff_exponent(c, z, y);
          CHECK(got.value == doctest::Approx(chernoff_by_search(c, z, y)).epsilon(1e-8));
        }
      }
    }
  }

  TEST_CASE("discounted tail weights") {
    const std::vector<double> times{0.5, 1.0};
    const std::vector<double> s = s_weights(1.0, times);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == doctest::Approx(1.0 + std::exp(-0.5)).epsilon(1e-14));
    CHECK(s[1] == 1.0);

    // On a regular grid the first weight is the sup and matches the closed form.
    const double t = 3.0, sigma = 0.7;
    const int n = 17;
    std::vector<double> regular(n);
    for (int k = 0; k < n; ++k) regular[static_cast<std::size_t>(k)] = t * (k + 1) / n;
    const std::vector<double> sr = s_weights(sigma, regular);
    CHECK(sr.front() == doctest::Approx(s_weight_sup_regular(sigma, t, n)).epsilon(1e-12));
    for (std::size_t k = 1; k < sr.size(); ++k) CHECK(sr[k] <= sr[k - 1]);
    CHECK(sr.back() == 1.0);

    CHECK_THROWS_AS(s_weights(1.0, std::vector<double>{1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(s_weights(1.0, std::vector<double>{-1.0, 0.5}), std::invalid_argument);
  }

  TEST_CASE("tensorized log-mgf bound collapses to one increment") {
    const std::vector<double> times{2.0};
    const std::vector<double> s{1.0};
    const double direct = log_mgf_bound(0.7, 2.0, 1.3, 0.5, 1.0, 2.0);
    const double chained = tensorized_log_mgf_bound(0.7, times, s, 0.5, 1.0, 2.0, 1.3);
    CHECK(chained == doctest::Approx(direct).epsilon(1e-14));
  }

  TEST_CASE("bias term and small-time limits") {
    CHECK(bias_term(1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(bias_term(1.0, 1.0, 1.0, 1.0) == doctest::Approx(0.6321206).epsilon(1e-7));
    // (1 - e^{-sigma t})/(sigma t) -> 1 as t -> 0.
    CHECK(bias_term(2.0, 1e-12, 1.0, 3.0) == doctest::Approx(3.0).epsilon(1e-9));
  }

  TEST_CASE("deviation bound at the reference point") {
    BoundParams p;
    p.sigma = p.b = p.V2 = p.lip = 1.0;
    p.horizon = 10.0;
    const DeviationBound bound = empirical_mean_bound(p, 1.0);

    const long double arg = 1.0L / (-std::expm1l(-10.0L));
    const long double exact = 2.0L * std::exp(-10.0L * ((1.0L + arg) * std::log1p(arg) - arg));
    CHECK(bound.probability == doctest::Approx(static_cast<double>(exact)).epsilon(1e-12));
    CHECK(bound.probability == doctest::Approx(0.042006).epsilon(1e-4));
    CHECK(bound.exponent > 0.0);
  }

  TEST_CASE("bound decreases in the deviation level") {
    BoundParams p;
    p.sigma = 0.5;
    p.b = 1.0;
    p.V2 = 2.0;
    p.lip = 1.0;
    p.horizon = 5.0;
    double previous = 3.0;
    for (double y = 0.1; y < 4.0; y += 0.1) {
      const double value = empirical_mean_bound(p, y).probability;
      CHECK(value < previous);
      previous = value;
    }
  }

  TEST_CASE("gaussian regime for small levels at long horizons") {
    BoundParams p;
    p.sigma = 1.0;
    p.b = 1.0;
    p.V2 = 1.0;
    p.lip = 1.0;
    p.horizon = 50.0;
    const double y = 1e-5;
    const double exponent = empirical_mean_bound(p, y).exponent;
    const double gaussian = p.horizon * p.sigma * p.sigma * y * y / (2.0 * p.V2 * p.lip * p.lip);
    CHECK(exponent / gaussian == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("one-step subdivision matches the chernoff composition") {
    BoundParams p;
    p.sigma = 0.8;
    p.b = 1.5;
    p.V2 = 3.0;
    p.lip = 2.0;
    p.horizon = 4.0;
    const double y = 1.2;
    const double c = p.V2 * (-std::expm1(-2.0 * p.sigma * p.horizon)) / (2.0 * p.b * p.b * p.sigma);
    const ChernoffResult direct = chernoff_exponent(c, p.b * p.lip, y);
    const DeviationBound stepped = empirical_mean_bound_steps(p, y, 1);
    CHECK(stepped.exponent == doctest::Approx(-direct.value).epsilon(1e-12));
  }

  TEST_CASE("subdivision exponents increase toward the limit") {
    BoundParams p;
    p.sigma = 1.0;
    p.b = 1.0;
    p.V2 = 1.0;
    p.lip = 1.0;
    p.horizon = 2.0;
    const double y = 0.8;
    const double limit = empirical_mean_bound(p, y).exponent;
    double previous = 0.0;
    for (std::int64_t n : {1, 2, 4, 16, 256, 65536}) {
      const double exponent = empirical_mean_bound_steps(p, y, n).exponent;
      CHECK(exponent >= previous - 1e-13);
      CHECK(exponent <= limit + 1e-12);
      previous = exponent;
    }
    CHECK(limit - previous < 1e-4);
  }

  TEST_CASE("floor-constant form is the bound at b = C/sqrt(K), V2 = 2C^2") {
    const double K = 2.0, C = 1.7, sigma = 0.4, lip = 1.1, t = 6.0, y = 0.9;
    BoundParams p;
    p.sigma = sigma;
    p.b = C / std::sqrt(K);
    p.V2 = 2.0 * C * C;
    p.lip = lip;
    p.horizon = t;
    const DeviationBound via_params = empirical_mean_bound(p, y);
    const DeviationBound via_floor = empirical_mean_bound_floor(K, C, sigma, lip, t, y);
    CHECK(via_floor.probability == doctest::Approx(via_params.probability).epsilon(1e-14));
    CHECK(via_floor.exponent == doctest::Approx(via_params.exponent).epsilon(1e-14));
  }

  TEST_CASE("queue tail bound approaches e/4 at the stationary point") {
    const double value = mminf_upper_tail(0, 100.0, 1.0, 1.0, 1.0);
    CHECK(value == doctest::Approx(std::exp(1.0) / 4.0).epsilon(1e-10));
    CHECK(value == doctest::Approx(0.6795705).epsilon(1e-7));
    // exp(-m g(y/m)) is the same number written through the rate function.
    const double m = 1.0 - std::exp(-2.0);
    CHECK(mminf_upper_tail(0, 2.0, 1.0, 1.0, 0.7) ==
          doctest::Approx(std::exp(-m * poisson_cramer(0.7 / m))).epsilon(1e-12));
  }

  TEST_CASE("invalid parameters are rejected") {
    BoundParams p;
    p.sigma = 0.0;
    p.b = p.V2 = p.lip = 1.0;
    p.horizon = 1.0;
    CHECK_THROWS_AS(empirical_mean_bound(p, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(chernoff_exponent(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(log_mgf_bound(-0.1, 1.0, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mminf_upper_tail(-1, 1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  }
}
