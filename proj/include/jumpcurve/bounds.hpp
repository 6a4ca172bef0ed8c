#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jumpcurve/types.hpp"

namespace jumpcurve {

// Convex rate function of a centered unit-rate Poisson increment,
//   g(u) = (1 + u) log(1 + u) - u,  u >= 0.
// Below u = 1e-4 the closed form loses digits to cancellation and the
// alternating series u^2/2 - u^3/6 + u^4/12 - u^5/20 + u^6/30 takes over.
double poisson_cramer(double u);

// One-step log-MGF bound for the deviation of a Lipschitz functional:
//   V2 * (1 - e^{-2 sigma t}) / (2 b^2 sigma) * (e^{tau z} - tau z - 1).
// sigma > 0, b > 0, V2 > 0, tau >= 0, t >= 0, z >= 0.
double log_mgf_bound(double tau, double t, double z, double sigma, double b, double V2);

struct ChernoffResult {
  double value = 0.0;     // inf_tau { -tau y + c (e^{tau z} - tau z - 1) } = -c g(y / (c z))
  double tau_star = 0.0;  // optimizer log(1 + y/(c z)) / z
};

// Exact optimization of the exponential Markov bound with coefficient c and
// jump scale z against deviation level y.
ChernoffResult chernoff_exponent(double c, double z, double y);

// Discounted tail weights over observation times 0 < t_1 < ... < t_n:
//   s_k = sum_{l >= k} e^{-sigma (t_l - t_k)}.
// The last weight is exactly 1.
std::vector<double> s_weights(double sigma, std::span<const double> times);

// sup_k s_k on the regular n-point subdivision of [0, t]:
//   (1 - e^{-sigma t}) / (1 - e^{-sigma t / n}).
double s_weight_sup_regular(double sigma, double t, std::int64_t n);

// Sum of per-increment log-MGF bounds along the subdivision, each increment
// discounted by its tail weight: sum_k log_mgf_bound(tau, t_k - t_{k-1}, s_k b lip).
double tensorized_log_mgf_bound(double tau, std::span<const double> times,
                                std::span<const double> s, double sigma, double b,
                                double V2, double lip);

// Start-point bias of the empirical mean against the stationary integral:
//   (1 - e^{-sigma t}) / (sigma t) * lip * mean_dist.
double bias_term(double sigma, double t, double lip, double mean_dist);

struct BoundParams {
  double sigma = 0.0;   // curvature lower bound, must be > 0
  double b = 0.0;       // a.s. bound on single-jump distance
  double V2 = 0.0;      // sup over states of expected squared jump distance rate
  double lip = 0.0;     // Lipschitz seminorm of the observable
  double horizon = 0.0; // time window t
};

struct DeviationBound {
  double probability = 0.0;  // 2 e^{-exponent}, may exceed 1 (vacuous)
  double exponent = 0.0;
  double g_argument = 0.0;
};

// Deviation bound for the empirical mean over [0, t] at level y:
//   2 exp( -(V2 t / b^2) g( b y sigma / (V2 (1 - e^{-sigma t}) lip) ) ).
DeviationBound empirical_mean_bound(const BoundParams& params, double y);

// Same bound before taking the subdivision limit, with n observation points:
//   exponent_n = (n V2 / (2 b^2 sigma)) (1 - e^{-2 sigma t / n})
//                * g( 2 b y sigma (1 - e^{-sigma t/n})
//                     / (V2 (1 - e^{-2 sigma t/n}) (1 - e^{-sigma t}) lip) ).
// Evaluated in extended precision; increases to the limit exponent as n grows.
DeviationBound empirical_mean_bound_steps(const BoundParams& params, double y, std::int64_t n);

// Bound stated through a uniform jump-rate floor K and a weight/rate
// compatibility constant C (so b = C / sqrt(K), V2 = 2 C^2):
//   2 exp( -2 K t g( y sigma / (2 sqrt(K) C (1 - e^{-sigma t}) lip) ) ).
DeviationBound empirical_mean_bound_floor(double rate_floor, double weight_rate_bound,
                                          double sigma, double lip, double t, double y);

// Upper tail of the time-t law of the infinite-server queue around its mean
// m = x0 e^{-nu t} + (lambda/nu)(1 - e^{-nu t}):
//   P(X_t >= m + y) <= exp( y - (m + y) log(1 + y / m) ) = exp(-m g(y/m)).
double mminf_upper_tail(State x0, double t, double lambda, double nu, double y);

}  // namespace jumpcurve
