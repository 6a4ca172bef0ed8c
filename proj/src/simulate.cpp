#include "jumpcurve/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

namespace jumpcurve {

namespace {

// Core walk shared by the path recorder and the streaming estimators so both
// consume the RNG identically: one exponential per holding time, one uniform
// per target choice.
template <typename Segment>
State walk(const Generator& gen, State x0, double horizon, Rng& rng, std::uint64_t max_jumps,
           Segment&& segment) {
  State x = x0;
  double now = 0.0;
  std::uint64_t jumps = 0;
  for (;;) {
    const std::vector<JumpEntry> row = gen.jumps(x);
    double total = 0.0;
    for (const JumpEntry& e : row) total += e.rate;
    if (total <= 0.0) {
      segment(now, horizon, x);  // absorbing state
      return x;
    }
    const double hold = rng.next_exponential(total);
    if (now + hold >= horizon) {
      segment(now, horizon, x);
      return x;
    }
    segment(now, now + hold, x);
    now += hold;

    const double pick = rng.next_double() * total;
    double cum = 0.0;
    State target = row.back().target;
    for (const JumpEntry& e : row) {
      cum += e.rate;
      if (pick < cum) {
        target = e.target;
        break;
      }
    }
    x = target;
    if (++jumps > max_jumps) {
      throw ExplosionSuspectError("path exceeded " + std::to_string(max_jumps) +
                                  " jumps before the horizon; explosion suspected");
    }
  }
}

void check_sim_args(State x0, double horizon) {
  if (x0 < 0) throw std::invalid_argument("start state must be nonnegative");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

// Runs body(replica) for all replicas on the requested number of threads.
// Each replica writes only its own slots, so the worker count cannot change
// any result, only wall time.
void for_each_replica(std::int64_t replicas, int workers, const std::function<void(std::int64_t)>& body) {
  if (workers <= 1) {
    for (std::int64_t r = 0; r < replicas; ++r) body(r);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::int64_t r = w; r < replicas; r += workers) body(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

PathRecord simulate_path(const Generator& gen, State x0, double horizon, std::uint64_t seed,
                         std::uint64_t replica, std::uint64_t max_jumps) {
  check_sim_args(x0, horizon);
  Rng rng(replica_seed(seed, replica));
  PathRecord path;
  path.start = x0;
  path.horizon = horizon;
  walk(gen, x0, horizon, rng, max_jumps, [&](double from, double, State state) {
    path.times.push_back(from);
    path.states.push_back(state);
  });
  return path;
}

double empirical_mean(const PathRecord& path, const Observable& f) {
  if (path.times.empty()) throw std::invalid_argument("empty path");
  double integral = 0.0;
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    const double until = k + 1 < path.times.size() ? path.times[k + 1] : path.horizon;
    integral += (until - path.times[k]) * f(path.states[k]);
  }
  return integral / path.horizon;
}

TailEstimate estimate_tail(const Generator& gen, const Observable& f, double center, State x0,
                           double horizon, std::span<const double> y_grid, std::int64_t replicas,
                           double alpha, std::uint64_t seed, double bias, int workers) {
  check_sim_args(x0, horizon);
  if (replicas < 100) throw std::invalid_argument("tail estimation needs at least 100 replicas");
  if (!(alpha > 0.0) || alpha >= 0.5) throw std::invalid_argument("alpha must be in (0, 0.5)");
  if (y_grid.empty()) throw std::invalid_argument("tail estimation needs deviation levels");
  if (bias < 0.0) throw std::invalid_argument("bias offset must be nonnegative");

  std::vector<double> deviations(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, workers, [&](std::int64_t r) {
    Rng rng(replica_seed(seed, static_cast<std::uint64_t>(r)));
    double integral = 0.0;
    walk(gen, x0, horizon, rng, 10'000'000, [&](double from, double until, State state) {
      integral += (until - from) * f(state);
    });
    deviations[static_cast<std::size_t>(r)] = std::abs(integral / horizon - center);
  });

  TailEstimate out;
  out.y_grid.assign(y_grid.begin(), y_grid.end());
  out.replicas = replicas;
  out.alpha = alpha;
  out.bias = bias;
  out.seed = seed;
  for (double y : y_grid) {
    if (!(y > 0.0)) throw std::invalid_argument("deviation levels must be positive");
    std::int64_t hits = 0, raw = 0;
    for (double dev : deviations) {
      if (dev >= y + bias) ++hits;
      if (dev >= y) ++raw;
    }
    out.hits.push_back(hits);
    out.raw_hits.push_back(raw);
    out.p_hat.push_back(static_cast<double>(hits) / static_cast<double>(replicas));
    out.p_upper.push_back(boost::math::binomial_distribution<double>::find_upper_bound_on_p(
        static_cast<double>(replicas), static_cast<double>(hits), alpha));
  }
  return out;
}

LaplaceEstimate empirical_laplace(const Generator& gen, const Observable& f, State x0, double horizon,
                                  std::span<const double> tau_grid, std::int64_t replicas,
                                  std::uint64_t seed, double level, int workers) {
  check_sim_args(x0, horizon);
  if (replicas < 100) throw std::invalid_argument("laplace estimation needs at least 100 replicas");
  if (tau_grid.empty()) throw std::invalid_argument("laplace estimation needs a tau grid");
  if (!(level > 0.5) || level >= 1.0) throw std::invalid_argument("bootstrap level must be in (0.5, 1)");

  std::vector<double> endpoint(static_cast<std::size_t>(replicas));
  for_each_replica(replicas, workers, [&](std::int64_t r) {
    Rng rng(replica_seed(seed, static_cast<std::uint64_t>(r)));
    State last = x0;
    walk(gen, x0, horizon, rng, 10'000'000, [&](double, double, State state) { last = state; });
    endpoint[static_cast<std::size_t>(r)] = f(last);
  });

  double mean = 0.0;
  for (double v : endpoint) mean += v;
  mean /= static_cast<double>(replicas);

  double spread = 0.0;
  for (double v : endpoint) spread = std::max(spread, std::abs(v - mean));

  LaplaceEstimate out;
  out.tau_grid.assign(tau_grid.begin(), tau_grid.end());
  out.replicas = replicas;
  out.seed = seed;

  constexpr int kResamples = 1000;
  // Bootstrap indices are drawn once and shared across the tau grid.
  std::vector<std::uint32_t> resample(static_cast<std::size_t>(kResamples) * static_cast<std::size_t>(replicas));
  {
    Rng rng(replica_seed(seed ^ 0xB00757AFu, 0));
    for (auto& idx : resample)
      idx = static_cast<std::uint32_t>(rng.next_u64() % static_cast<std::uint64_t>(replicas));
  }

  std::vector<double> boot(kResamples);
  for (double tau : tau_grid) {
    if (tau < 0.0) throw std::invalid_argument("tau grid must be nonnegative");
    if (tau * spread > 700.0) {
      out.value.push_back(0.0);
      out.upper.push_back(0.0);
      out.overflowed.push_back(true);
      continue;
    }
    std::vector<double> weights(static_cast<std::size_t>(replicas));
    double estimate = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      weights[i] = std::exp(tau * (endpoint[i] - mean));
      estimate += weights[i];
    }
    estimate /= static_cast<double>(replicas);

    for (int b = 0; b < kResamples; ++b) {
      double sum = 0.0;
      const std::uint32_t* idx = resample.data() + static_cast<std::size_t>(b) * static_cast<std::size_t>(replicas);
      for (std::int64_t i = 0; i < replicas; ++i) sum += weights[idx[i]];
      boot[static_cast<std::size_t>(b)] = sum / static_cast<double>(replicas);
    }
    std::sort(boot.begin(), boot.end());
    const auto rank = static_cast<std::size_t>(std::ceil(level * kResamples)) - 1;
    out.value.push_back(estimate);
    out.upper.push_back(boot[std::min(rank, boot.size() - 1)]);
    out.overflowed.push_back(false);
  }
  return out;
}

ExactLaw mminf_exact_law(State x0, double t, double lambda, double nu, State cap) {
  if (x0 < 0 || cap < 0) throw std::invalid_argument("states must be nonnegative");
  if (!(lambda > 0.0) || !(nu > 0.0)) throw std::invalid_argument("rates must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");

  const double survive = std::exp(-nu * t);
  const double influx = (lambda / nu) * (-std::expm1(-nu * t));

  // Binomial(x0, survive) pmf.
  std::vector<double> binom(static_cast<std::size_t>(x0) + 1);
  for (State k = 0; k <= x0; ++k) {
    double log_p = std::lgamma(static_cast<double>(x0) + 1.0) -
                   std::lgamma(static_cast<double>(k) + 1.0) -
                   std::lgamma(static_cast<double>(x0 - k) + 1.0);
    if (k > 0) log_p += static_cast<double>(k) * std::log(survive);
    if (x0 - k > 0) log_p += static_cast<double>(x0 - k) * std::log1p(-survive);
    binom[static_cast<std::size_t>(k)] = std::exp(log_p);
  }

  // Poisson(influx) pmf up to the cap.
  std::vector<double> pois(static_cast<std::size_t>(cap) + 1);
  pois[0] = std::exp(-influx);
  for (State k = 1; k <= cap; ++k)
    pois[static_cast<std::size_t>(k)] = pois[static_cast<std::size_t>(k - 1)] * influx / static_cast<double>(k);

  ExactLaw law;
  law.pmf.assign(static_cast<std::size_t>(cap) + 1, 0.0);
  for (State k = 0; k <= std::min(x0, cap); ++k) {
    for (State j = 0; k + j <= cap; ++j) {
      law.pmf[static_cast<std::size_t>(k + j)] +=
          binom[static_cast<std::size_t>(k)] * pois[static_cast<std::size_t>(j)];
    }
  }
  double total = 0.0;
  for (double p : law.pmf) total += p;
  law.tail_mass = std::max(0.0, 1.0 - total);
  return law;
}

}  // namespace jumpcurve
