#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jumpcurve/jump_process.hpp"
#include "jumpcurve/rng.hpp"
#include "jumpcurve/types.hpp"

namespace jumpcurve {

// One exact trajectory: piecewise constant, jump times strictly increasing,
// states[k] held on [times[k], times[k+1]) and the last state up to horizon.
struct PathRecord {
  State start = 0;
  double horizon = 0.0;
  std::vector<double> times;   // times[0] = 0
  std::vector<State> states;  // states[0] = start
};

// Exact stochastic simulation: exponential holding time at the current total
// rate, jump target chosen with probability proportional to its rate. The
// replica RNG stream is Rng(replica_seed(seed, replica)); see rng.hpp for the
// bit-exact seeding rule. Throws ExplosionSuspectError past max_jumps.
PathRecord simulate_path(const Generator& gen, State x0, double horizon, std::uint64_t seed,
                         std::uint64_t replica = 0, std::uint64_t max_jumps = 10'000'000);

// Time average of f along the path: exact integral of the piecewise constant
// function f(X_s), divided by the horizon.
double empirical_mean(const PathRecord& path, const Observable& f);

struct TailEstimate {
  std::vector<double> y_grid;
  std::vector<std::int64_t> hits;       // replicas with |mean - center| >= y + bias
  std::vector<std::int64_t> raw_hits;   // same without the bias offset
  std::vector<double> p_hat;
  std::vector<double> p_upper;          // one-sided exact binomial bound at level 1 - alpha
  std::int64_t replicas = 0;
  double alpha = 0.0;
  double bias = 0.0;
  std::uint64_t seed = 0;
};

// Monte Carlo estimate of P(|empirical mean - center| >= y + bias) for each y,
// from `replicas` independent paths. Replicas are seeded individually, so any
// worker count produces the same counts; workers > 1 only adds threads.
TailEstimate estimate_tail(const Generator& gen, const Observable& f, double center, State x0,
                           double horizon, std::span<const double> y_grid, std::int64_t replicas,
                           double alpha, std::uint64_t seed, double bias, int workers = 1);

struct LaplaceEstimate {
  std::vector<double> tau_grid;
  std::vector<double> value;      // mean over replicas of exp(tau (f(X_T) - mean))
  std::vector<double> upper;      // one-sided bootstrap bound at the given level
  std::vector<bool> overflowed;   // tau skipped: exponent would exceed the guard
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
};

// Empirical centered Laplace transform of f(X_T) on a tau grid, with a
// percentile bootstrap (1000 resamples) for the upper confidence bound.
LaplaceEstimate empirical_laplace(const Generator& gen, const Observable& f, State x0, double horizon,
                                  std::span<const double> tau_grid, std::int64_t replicas,
                                  std::uint64_t seed, double level = 0.99, int workers = 1);

struct ExactLaw {
  std::vector<double> pmf;  // over {0..cap}
  double tail_mass = 0.0;   // mass above the cap
};

// Time-t law of the infinite-server queue from x0: a thinned binomial of the
// survivors convolved with a Poisson influx,
//   Binomial(x0, e^{-nu t}) * Poisson((lambda/nu)(1 - e^{-nu t})).
ExactLaw mminf_exact_law(State x0, double t, double lambda, double nu, State cap);

}  // namespace jumpcurve
