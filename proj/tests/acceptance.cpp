// End-to-end acceptance checks. Each check prints one [PASS]/[FAIL] line;
// the process exits nonzero if any check fails. Tolerances are pinned here
// and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "jumpcurve/bounds.hpp"
#include "jumpcurve/config.hpp"
#include "jumpcurve/curvature.hpp"
#include "jumpcurve/jump_process.hpp"
#include "jumpcurve/metric.hpp"
#include "jumpcurve/rng.hpp"
#include "jumpcurve/runner.hpp"
#include "jumpcurve/simulate.hpp"
#include "jumpcurve/transport.hpp"

using namespace jumpcurve;

namespace {

int failures = 0;
std::chrono::steady_clock::time_point check_start;

void begin() { check_start = std::chrono::steady_clock::now(); }

void report(const char* name, bool pass, const std::string& detail) {
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - check_start).count();
  std::printf("[%s] %-24s %s (%.2f s)\n", pass ? "PASS" : "FAIL", name, detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return std::string(buf);
}

// 1. The curvature scan plus tail limit reproduces the two closed forms for
//    the infinite-server model: nu/2 under inverse-sqrt weights, nu under
//    unit weights, both to 1e-9.
void check_curvature_exactness() {
  begin();
  bool pass = true;
  double worst = 0.0;
  for (double nu : {0.5, 1.0, 2.5}) {
    const BirthDeathRates rates = BirthDeathRates::mm_infinity(nu, nu);
    const CurvatureCertificate inv =
        birth_death_curvature(rates, PathMetric::inverse_sqrt(), 4000);
    const CurvatureCertificate cls =
        birth_death_curvature(rates, PathMetric::classical(), 4000);
    worst = std::max(worst, std::abs(inv.sigma - 0.5 * nu));
    worst = std::max(worst, std::abs(cls.sigma - nu));
    pass = pass && inv.tail_certified && cls.tail_certified;
  }
  pass = pass && worst <= 1e-9;
  report("curvature-exactness", pass, "max |sigma - closed form| = " + fmt(worst));
}

// 2. The pair drift of the coordinatewise coupling is dominated by
//    -sigma * distance on all pairs 0 <= x < y <= 500, for five randomized
//    ergodic birth-death models.
void check_coupling_domination() {
  begin();
  Rng rng(777001u);
  bool pass = true;
  double worst_gap = -1e300;
  for (int m = 0; m < 5; ++m) {
    const double a = 0.5 + 1.5 * rng.next_double();
    const double b = 0.5 + 1.5 * rng.next_double();
    const double wob1 = 0.3 * rng.next_double();
    const double wob2 = 0.2 * rng.next_double();
    const auto birth = [a, wob1](State x) {
      return a * (1.0 + wob1 * static_cast<double>((x * 2654435761u) % 7) / 7.0);
    };
    const auto death = [b, wob2](State x) {
      return b * static_cast<double>(x) *
             (1.0 + wob2 * static_cast<double>((x * 40503u) % 5) / 5.0);
    };
    const BirthDeathRates rates = BirthDeathRates::custom(birth, death);
    if (check_ergodicity(rates, 256, 1e-9).verdict != ErgodicityVerdict::Ergodic) {
      pass = false;
      continue;
    }
    const PathMetric metric = m % 2 == 0 ? PathMetric::inverse_sqrt() : PathMetric::classical();
    const double sigma = birth_death_curvature(rates, metric, 502).sigma;
    for (State x = 0; x <= 500 && pass; ++x) {
      for (State y = x + 1; y <= 500; ++y) {
        const double drift = coupling_drift(rates, metric, x, y);
        const double gap = drift + sigma * metric.distance(x, y);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-9) {
          pass = false;
          break;
        }
      }
    }
  }
  report("coupling-domination", pass, "worst drift + sigma*dist = " + fmt(worst_gap));
}

// 3. Solver vs line formula and primal vs dual on 200 random measure pairs
//    supported in {0..20}: both gaps at most 1e-9.
void check_transport_consistency() {
  begin();
  Rng rng(31415u);
  const PathMetric classical = PathMetric::classical();
  const PathMetric inv = PathMetric::inverse_sqrt();
  const PathMetric table =
      PathMetric::from_table({0.8, 1.3, 0.4, 2.0, 0.6, 1.1}, TailRule::ConstantExtension);
  const PathMetric* metrics[] = {&classical, &inv, &table};

  const auto draw = [&rng]() {
    const std::size_t points = 1 + rng.next_u64() % 8;
    std::vector<State> support;
    std::vector<double> weights;
    while (support.size() < points) {
      const State x = static_cast<State>(rng.next_u64() % 21);
      bool dup = false;
      for (State s : support) dup = dup || s == x;
      if (dup) continue;
      support.push_back(x);
      weights.push_back(0.05 + rng.next_double());
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) sum += weights[i];
    weights.back() = 1.0 - sum;
    return DiscreteMeasure::make(std::move(support), std::move(weights));
  };

  bool pass = true;
  double worst_line = 0.0, worst_dual = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const DiscreteMeasure mu = draw();
    const DiscreteMeasure nu = draw();
    const PathMetric& metric = *metrics[trial % 3];
    const double primal = wasserstein_primal(mu, nu, metric).distance;
    const double line = wasserstein_path_1d(mu, nu, metric);
    worst_line = std::max(worst_line, std::abs(primal - line));
    const DualCertificate cert = dual_certificate(mu, nu, metric, primal, 1e-9);
    worst_dual = std::max(worst_dual, primal - cert.objective);
    pass = pass && cert.verified;
  }
  pass = pass && worst_line <= 1e-9 && worst_dual <= 1e-9;
  report("transport-consistency", pass,
         "primal vs line " + fmt(worst_line) + ", duality gap " + fmt(worst_dual));
}

// 4. The semigroup contraction estimate lands on 1/N for flip chains
//    (N = 1..4, tolerance 1e-3) and within [sigma, sigma + 0.1] of the
//    formula value for the truncated infinite-server ladder (cap 80).
void check_numeric_curvature() {
  begin();
  bool pass = true;
  double worst_cube = 0.0;
  const std::vector<double> cube_grid = {0.5, 1.0, 2.0};
  for (int n = 1; n <= 4; ++n) {
    const Generator cube = hypercube_generator(n);
    const ProductMetric hamming(std::make_shared<TrivialMetric>(), n, 2);
    const CurvatureCertificate cert =
        estimate_curvature_numeric(cube, hamming, cube_grid, 1e-12);
    worst_cube = std::max(worst_cube, std::abs(cert.sigma - 1.0 / n));
  }
  pass = pass && worst_cube <= 1e-3;

  const BirthDeathRates rates = BirthDeathRates::mm_infinity(1.0, 1.0).truncated(80);
  const PathMetric inv = PathMetric::inverse_sqrt();
  const double exact = birth_death_curvature(rates, inv, 81).sigma;
  const std::vector<double> ladder_grid = {1.0, 2.0, 4.0, 8.0};
  const CurvatureCertificate numeric =
      estimate_curvature_numeric(rates.to_generator(), inv, ladder_grid, 1e-12);
  pass = pass && numeric.sigma >= exact - 1e-9 && numeric.sigma <= exact + 0.1;
  report("numeric-curvature", pass,
         "cube gap " + fmt(worst_cube) + ", ladder " + fmt(numeric.sigma) + " vs formula " +
             fmt(exact));
}

// 5. The deviation bound holds against Monte Carlo at 99% confidence on the
//    infinite-server model (sqrt observable, t=10, 1e5 replicas), and the
//    empirical transform stays below its exponential envelope on the
//    two-state chain for tau up to 2.
void check_bound_verification() {
  begin();
  const BirthDeathRates rates = BirthDeathRates::mm_infinity(1.0, 1.0);
  const PathMetric inv = PathMetric::inverse_sqrt();
  const Observable sqrt_obs = [](State x) { return std::sqrt(static_cast<double>(x)); };

  const double sigma = birth_death_curvature(rates, inv, 4000).sigma;
  const double lip = lipschitz_seminorm(sqrt_obs, inv, 4000).value;
  const FloorConstants fc = check_floor_constants(rates, inv, 4000);
  const StationaryMeasure pi = stationary_measure(rates, 1e-14);
  const auto [center, residual] = stationary_integral(rates, pi, sqrt_obs);

  std::vector<State> support;
  std::vector<double> weights;
  for (std::size_t x = 0; x < pi.pmf.size(); ++x)
    if (pi.pmf[x] > 0.0) {
      support.push_back(static_cast<State>(x));
      weights.push_back(pi.pmf[x]);
    }
  const DiscreteMeasure pim = DiscreteMeasure::make(std::move(support), std::move(weights));
  const double mean_dist = wasserstein_path_1d(DiscreteMeasure::point_mass(0), pim, inv);
  const double t = 10.0;
  const double bias = bias_term(sigma, t, lip, mean_dist);

  std::vector<double> y_grid;
  for (int k = 1; k <= 10; ++k) y_grid.push_back(0.2 * k);
  const TailEstimate tail = estimate_tail(rates.to_generator(), sqrt_obs, center, 0, t, y_grid,
                                          100000, 0.01, 555001u, bias, 4);
  bool tail_ok = fc.holds && residual < 1e-10;
  double worst_margin = 1e300;
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double bound = empirical_mean_bound_floor(fc.rate_floor, fc.weight_rate_bound, sigma,
                                                    lip, t, y_grid[i])
                             .probability;
    worst_margin = std::min(worst_margin, bound - tail.p_upper[i]);
    tail_ok = tail_ok && tail.p_upper[i] <= bound;
  }

  // Exponential envelope of the centered endpoint transform.
  const Generator flip =
      BirthDeathRates::custom([](State) { return 0.5; }, [](State) { return 0.5; })
          .truncated(1)
          .to_generator();
  const double mt = 1.0;
  const std::vector<double> taus = {0.5, 1.0, 1.5, 2.0};
  const LaplaceEstimate lap = empirical_laplace(flip, [](State x) { return double(x); }, 0, mt,
                                                taus, 100000, 555002u, 0.99, 4);
  bool mgf_ok = true;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double envelope = std::exp(log_mgf_bound(taus[i], mt, 1.0, 1.0, 1.0, 0.5));
    mgf_ok = mgf_ok && !lap.overflowed[i] && lap.upper[i] <= envelope;
  }

  report("bound-verification", tail_ok && mgf_ok,
         "min bound margin " + fmt(worst_margin) + ", transform envelope " +
             (mgf_ok ? "held" : "broken"));
}

// 6. Product-of-two-bits chain end to end: the tensorized bound evaluated
//    through the generic machinery equals the closed displayed form, and the
//    Monte Carlo tail at 1e5 replicas stays below it for every y.
void check_product_end_to_end() {
  begin();
  const int n = 2;
  const double t = 20.0;
  const Generator cube = hypercube_generator(n);
  const Observable bits = [](State x) {
    return static_cast<double>((x & 1) + ((x >> 1) & 1));
  };

  BoundParams params;
  params.sigma = 1.0 / n;
  params.b = 1.0;
  params.V2 = 0.5;
  params.lip = 1.0;
  params.horizon = t;

  const std::vector<double> y_grid = {0.25, 0.5, 0.75, 1.0, 1.5};
  bool pass = true;
  double worst_form = 0.0, worst_margin = 1e300;

  const double center = 0.5 * n;
  const double mean_dist = 1.0;  // from the zero corner, 1/2 per coordinate
  const double bias = bias_term(params.sigma, t, params.lip, mean_dist);
  const TailEstimate tail =
      estimate_tail(cube, bits, center, 0, t, y_grid, 100000, 0.01, 555003u, bias, 4);

  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double y = y_grid[i];
    const double general = empirical_mean_bound(params, y).probability;
    const double displayed =
        2.0 * std::exp(-(t / 2.0) *
                       poisson_cramer(2.0 * y / (n * (1.0 - std::exp(-t / n)) * params.lip)));
    worst_form = std::max(worst_form, std::abs(general - displayed));
    worst_margin = std::min(worst_margin, displayed - tail.p_upper[i]);
    pass = pass && tail.p_upper[i] <= displayed;
  }
  pass = pass && worst_form <= 1e-12;
  report("product-end-to-end", pass,
         "form gap " + fmt(worst_form) + ", min margin " + fmt(worst_margin));
}

// 7. The n-point evaluation converges to its limit: at n = 2^20 the two
//    exponents agree to 1e-6 across a 3x3x3 parameter grid.
void check_subdivision_limit() {
  begin();
  bool pass = true;
  double worst = 0.0;
  for (double sigma : {0.25, 0.5, 1.0}) {
    for (double t : {0.25, 0.5, 1.0}) {
      for (double y : {0.5, 1.0, 2.0}) {
        BoundParams params;
        params.sigma = sigma;
        params.b = 1.0;
        params.V2 = 1.0;
        params.lip = 1.0;
        params.horizon = t;
        const double limit = empirical_mean_bound(params, y).exponent;
        const double steps = empirical_mean_bound_steps(params, y, 1 << 20).exponent;
        worst = std::max(worst, std::abs(steps - limit));
      }
    }
  }
  pass = worst <= 1e-6;
  report("subdivision-limit", pass, "max |n-point - limit| = " + fmt(worst));
}

// 8. The simulator and the uniformized semigroup both reproduce the closed
//    transient law of the infinite-server queue: total variation at most
//    0.02 over 1e5 paths, and rows within 1e-8 pointwise.
void check_law_oracle() {
  begin();
  const double lambda = 1.0, nu = 1.0, t = 1.0;
  const State x0 = 3;
  const ExactLaw law = mminf_exact_law(x0, t, lambda, nu, 60);

  const Generator gen = BirthDeathRates::mm_infinity(lambda, nu).to_generator();
  const std::int64_t reps = 100000;
  std::vector<std::int64_t> hist(61, 0);
  std::int64_t beyond = 0;
  for (std::int64_t r = 0; r < reps; ++r) {
    const PathRecord path = simulate_path(gen, x0, t, 555004u, static_cast<std::uint64_t>(r));
    const State end = path.states.back();
    if (end <= 60) ++hist[static_cast<std::size_t>(end)];
    else ++beyond;
  }
  double tv = static_cast<double>(beyond) / static_cast<double>(reps);
  for (std::size_t k = 0; k <= 60; ++k)
    tv += std::abs(static_cast<double>(hist[k]) / static_cast<double>(reps) - law.pmf[k]);
  tv *= 0.5;

  const Generator capped = BirthDeathRates::mm_infinity(lambda, nu).truncated(200).to_generator();
  std::vector<State> window(121);
  std::iota(window.begin(), window.end(), State{0});
  const std::vector<State> starts = {x0};
  const SemigroupRows rows = semigroup_rows(capped, t, starts, window, 1e-12);
  double worst_row = 0.0;
  for (std::size_t c = 0; c <= 60; ++c)
    worst_row = std::max(worst_row, std::abs(rows.rows[0][c] - law.pmf[c]));

  const bool pass = tv <= 0.02 && worst_row <= 1e-8;
  report("law-oracle", pass, "TV " + fmt(tv) + ", row gap " + fmt(worst_row));
}

// 9. Full verification reports are byte-identical across repeated runs and
//    across worker counts.
void check_reproducibility() {
  begin();
  const auto config_json = nlohmann::ordered_json::parse(R"({
    "schema": 1,
    "model": {"model": "mm_infinity", "lambda": 1.0, "nu": 1.0},
    "metric": {"kind": "inv_sqrt"},
    "observable": {"kind": "sqrt"},
    "horizon": 6.0,
    "y_grid": [0.5, 1.0, 1.5],
    "replicas": 5000,
    "seed": 20240815,
    "alpha": 0.01,
    "bound_form": "floor",
    "workers": 1
  })");
  ExperimentConfig cfg = parse_config(config_json);
  RunOptions opts;

  std::ostringstream a, b, c;
  const int ra = run_verify(cfg, opts, a);
  const int rb = run_verify(cfg, opts, b);
  cfg.workers = 4;
  const int rc = run_verify(cfg, opts, c);

  const bool pass = ra == 0 && rb == 0 && rc == 0 && a.str() == b.str() && a.str() == c.str();
  report("reproducibility", pass,
         pass ? "reports byte-identical across runs and workers" : "report bytes diverged");
}

}  // namespace

int main() {
  check_curvature_exactness();
  check_coupling_domination();
  check_transport_consistency();
  check_numeric_curvature();
  check_bound_verification();
  check_product_end_to_end();
  check_subdivision_limit();
  check_law_oracle();
  check_reproducibility();
  if (failures == 0) {
    std::printf("all checks passed\n");
    return 0;
  }
  std::printf("%d check(s) failed\n", failures);
  return 1;
}
