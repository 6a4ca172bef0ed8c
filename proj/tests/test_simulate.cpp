#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "jumpcurve/jump_process.hpp"
#include "jumpcurve/rng.hpp"
#include "jumpcurve/simulate.hpp"

using namespace jumpcurve;

namespace {

// Kolmogorov-Smirnov distance between samples and the unit exponential law.
double ks_exponential(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 1.0 - std::exp(-samples[i]);
    worst = std::max(worst, std::abs(cdf - static_cast<double>(i) / n));
    worst = std::max(worst, std::abs(cdf - static_cast<double>(i + 1) / n));
  }
  return worst;
}

Generator two_state_unit() {
  return BirthDeathRates::custom([](State) { return 1.0; }, [](State) { return 1.0; })
      .truncated(1)
      .to_generator();
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("replica seeds are distinct and stable") {
    CHECK(replica_seed(1234u, 0) != replica_seed(1234u, 1));
    CHECK(replica_seed(1234u, 0) != replica_seed(1235u, 0));
    CHECK(replica_seed(1234u, 7) == replica_seed(1234u, 7));
  }

  TEST_CASE("holding times are exponential") {
    // Rate-1 holding times from the raw stream; KS critical value at the 1%
    // level for n = 1e4 is 1.628/sqrt(n).
    Rng rng(555u);
    std::vector<double> draws(10000);
    for (double& d : draws) d = rng.next_exponential(1.0);
    CHECK(ks_exponential(std::move(draws)) < 0.01628);
  }

  TEST_CASE("jump counts follow the embedded clock") {
    // Two-state flip chain with both rates one: jumps over [0, T] form a
    // Poisson process of rate one, so the count has mean and variance T.
    const Generator gen = two_state_unit();
    const double horizon = 10.0;
    const int reps = 4000;
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      const PathRecord path = simulate_path(gen, 0, horizon, 2024u, static_cast<std::uint64_t>(r));
      // Entry zero is the initial segment, not a jump.
      sum += static_cast<double>(path.times.size() - 1);
    }
    const double mean = sum / reps;
    const double se = std::sqrt(horizon / reps);
    CHECK(std::abs(mean - horizon) < 4.0 * se);
  }

  TEST_CASE("paths are reproducible and replica-indexed") {
    const Generator gen = two_state_unit();
    const PathRecord a = simulate_path(gen, 0, 25.0, 99u, 3);
    const PathRecord b = simulate_path(gen, 0, 25.0, 99u, 3);
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t i = 0; i < a.times.size(); ++i) {
      CHECK(a.times[i] == b.times[i]);
      CHECK(a.states[i] == b.states[i]);
    }
    const PathRecord c = simulate_path(gen, 0, 25.0, 99u, 4);
    CHECK(a.times != c.times);
  }

  TEST_CASE("occupation average of a flat function is exact") {
    const Generator gen = two_state_unit();
    const PathRecord path = simulate_path(gen, 0, 12.0, 7u);
    CHECK(empirical_mean(path, [](State) { return 3.5; }) == doctest::Approx(3.5).epsilon(1e-13));
  }

  TEST_CASE("endpoint law matches the explicit immigration law") {
    // One-step law comparison at modest replica count; the total variation
    // gap between the empirical endpoint histogram and the closed-form law
    // concentrates near sqrt(states / replicas).
    const double lambda = 1.0, nu = 1.0, t = 2.0;
    const State x0 = 2;
    const Generator gen = BirthDeathRates::mm_infinity(lambda, nu).truncated(200).to_generator();
    const int reps = 20000;
    std::vector<double> hist(32, 0.0);
    for (int r = 0; r < reps; ++r) {
      const PathRecord path = simulate_path(gen, x0, t, 4242u, static_cast<std::uint64_t>(r));
      const State end = path.states.back();
      if (end < static_cast<State>(hist.size())) hist[static_cast<std::size_t>(end)] += 1.0;
    }
    const ExactLaw law = mminf_exact_law(x0, t, lambda, nu, 31);
    double tv = 0.0;
    for (std::size_t k = 0; k < hist.size(); ++k)
      tv += std::abs(hist[k] / reps - law.pmf[k]);
    CHECK(0.5 * tv < 0.02);
  }

  TEST_CASE("tail estimates cover edge cases") {
    const Generator gen = two_state_unit();
    auto f = [](State x) { return static_cast<double>(x); };

    // Deviations of the occupation mean of a {0,1} path can never exceed 1.
    const std::vector<double> far_grid = {5.0, 9.0};
    const TailEstimate far = estimate_tail(gen, f, 0.5, 0, 5.0, far_grid, 200, 0.05, 11u, 0.0);
    CHECK(far.hits[0] == 0);
    CHECK(far.hits[1] == 0);
    CHECK(far.p_hat[0] == 0.0);
    CHECK(far.p_upper[0] > 0.0);   // exact binomial upper limit stays positive
    CHECK(far.p_upper[0] < 0.02);

    // A constant observable never deviates from its own value.
    const std::vector<double> near_grid = {0.1};
    const TailEstimate flat =
        estimate_tail(gen, [](State) { return 2.0; }, 2.0, 0, 5.0, near_grid, 150, 0.05, 12u, 0.0);
    CHECK(flat.hits[0] == 0);
  }

  TEST_CASE("tail estimates are worker-count invariant") {
    const Generator gen = two_state_unit();
    auto f = [](State x) { return static_cast<double>(x); };
    const std::vector<double> ys = {0.05, 0.1, 0.2};
    const TailEstimate one = estimate_tail(gen, f, 0.5, 0, 8.0, ys, 600, 0.05, 77u, 0.0, 1);
    const TailEstimate four = estimate_tail(gen, f, 0.5, 0, 8.0, ys, 600, 0.05, 77u, 0.0, 4);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      CHECK(one.hits[i] == four.hits[i]);
      CHECK(one.p_hat[i] == four.p_hat[i]);
      CHECK(one.p_upper[i] == four.p_upper[i]);
    }
  }

  TEST_CASE("laplace transform estimates against the closed form") {
    // Endpoint of the flip chain at time t from state 0: P(X_t = 1) =
    // (1 - e^{-2t})/2, so E exp(tau(X_t - p)) has an explicit value.
    const Generator gen = two_state_unit();
    const double t = 3.0;
    const double p = 0.5 * (1.0 - std::exp(-2.0 * t));
    auto f = [](State x) { return static_cast<double>(x); };
    const std::vector<double> taus = {0.25, 0.5, 1.0};
    const LaplaceEstimate est = empirical_laplace(gen, f, 0, t, taus, 30000, 2025u, 0.99, 2);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const double tau = taus[i];
      const double exact = (1.0 - p) * std::exp(-tau * p) + p * std::exp(tau * (1.0 - p));
      CHECK(est.value[i] == doctest::Approx(exact).epsilon(0.02));
      CHECK(est.upper[i] >= exact * 0.98);
    }
    // Deterministic across runs and worker counts.
    const LaplaceEstimate again = empirical_laplace(gen, f, 0, t, taus, 30000, 2025u, 0.99, 5);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      CHECK(est.value[i] == again.value[i]);
      CHECK(est.upper[i] == again.upper[i]);
    }
  }

  TEST_CASE("runaway chains trip the jump guard") {
    // Pure birth at exploding rate; the path cannot finish a unit horizon
    // within any finite jump budget.
    const Generator runaway([](State x) {
      const double r = std::pow(1.0 + static_cast<double>(x), 2.0);
      return std::vector<JumpEntry>{{x + 1, r}};
    });
    CHECK_THROWS_AS(simulate_path(runaway, 0, 1.0, 5u, 0, 20000), ExplosionSuspectError);
  }

  TEST_CASE("closed-form law helper is a probability vector") {
    const ExactLaw law = mminf_exact_law(5, 0.8, 2.0, 1.5, 60);
    double total = 0.0;
    for (double p : law.pmf) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(total + law.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(law.tail_mass < 1e-8);
  }
}
