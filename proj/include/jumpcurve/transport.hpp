#pragma once

#include <vector>

#include "jumpcurve/metric.hpp"
#include "jumpcurve/types.hpp"

namespace jumpcurve {

// Finitely supported probability measure. Support points are distinct and
// sorted; weights are positive and sum to 1 within 1e-12 (semigroup rows are
// renormalized before they get here).
struct DiscreteMeasure {
  std::vector<State> support;
  std::vector<double> weights;

  static DiscreteMeasure point_mass(State x);
  static DiscreteMeasure make(std::vector<State> support, std::vector<double> weights);
};

struct TransportPlan {
  std::vector<State> from;          // row support (first measure)
  std::vector<State> to;            // column support (second measure)
  std::vector<double> flow;         // row-major |from| x |to|, nonnegative
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  double cost = 0.0;

  double& at(std::size_t i, std::size_t j) { return flow[i * to.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return flow[i * to.size() + j]; }
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
};

// Exact optimal transport between two finitely supported measures under the
// given ground metric (network simplex on the dense transportation polytope).
// Degenerate pivot ties are broken toward the lowest index so repeated runs
// produce the identical plan.
TransportResult wasserstein_primal(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const Metric& metric);

// Closed form on the line: W(mu, nu) = sum_k u_k |F_mu(k) - F_nu(k)| where F
// is the cumulative distribution and u_k the path-metric gap at k.
double wasserstein_path_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const PathMetric& metric);

// Kantorovich potential certifying a computed distance from below.
struct DualCertificate {
  std::vector<State> points;   // union of both supports, sorted
  std::vector<double> values;  // f at those points
  double objective = 0.0;      // | int f dmu - int f dnu |
  double lip = 0.0;            // max over point pairs of |f(a)-f(b)| / d(a,b)
  bool verified = false;       // lip <= 1 + tol and objective >= distance - tol
};

// For a path metric the potential is built from the sign pattern of the CDF
// difference, f(x) = sum_{k<x} u_k sign(F_mu(k) - F_nu(k)); otherwise it is
// the c-transform of the solver's column potentials. Either way the result
// is checked to be 1-Lipschitz and to attain the distance within tol.
DualCertificate dual_certificate(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const Metric& metric, double distance, double tol);

}  // namespace jumpcurve
