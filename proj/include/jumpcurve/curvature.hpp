#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "jumpcurve/jump_process.hpp"
#include "jumpcurve/metric.hpp"
#include "jumpcurve/types.hpp"

namespace jumpcurve {

enum class CurvatureMethod { ExactFormula, NumericContraction, Tensorized };

// Lower bound on the coarse Ricci curvature of a chain together with how it
// was obtained and how trustworthy the scan tail is.
struct CurvatureCertificate {
  double sigma = 0.0;
  CurvatureMethod method = CurvatureMethod::ExactFormula;
  std::string metric_id;
  State truncation = 0;

  // Exact-formula diagnostics.
  bool attained = false;                // infimum reached inside the scan
  std::optional<State> argmin;          // first scan index attaining the minimum
  std::optional<double> tail_limit;     // analytic limit of the expression, when known
  bool tail_certified = false;          // scan minimum valid beyond the window

  // Numeric-contraction diagnostics.
  std::vector<double> t_grid;
  std::vector<double> sigma_bar;        // -log of the worst contraction ratio at each t
  std::vector<double> sigma_over_t;
  std::optional<double> small_t_estimate;          // sigma_bar / t at the smallest grid time
  std::pair<State, State> worst_pair{0, 0};        // pair attaining the worst ratio at that time
};

// One-step contraction expression of a birth-death ladder under a weighted
// path metric, evaluated at gap x:
//   death(x+1) + birth(x) - death(x) u_{x-1}/u_x - birth(x+1) u_{x+1}/u_x.
// The curvature is its infimum over x.
double curvature_expression(const BirthDeathRates& rates, const PathMetric& metric, State x);

// Infimum of curvature_expression over x < scan_limit, combined with the
// analytic tail limit when the rate and weight families have one (for the
// infinite-server queue under inverse-sqrt weights the tail gives nu/2).
// Without a closed-form tail the certificate keeps the scan minimum and
// clears tail_certified.
CurvatureCertificate birth_death_curvature(const BirthDeathRates& rates, const PathMetric& metric,
                                           State scan_limit);

// Drift of the distance under the classical monotone coupling of two copies
// started at x and y:
//   birth(y) u_y - death(y) u_{y-1} - birth(x) u_x + death(x) u_{x-1}
// for x <= y, negated otherwise. Additive over adjacent gaps, and bounded by
// -sigma * d(x, y) when sigma is the certified curvature.
double coupling_drift(const BirthDeathRates& rates, const PathMetric& metric, State x, State y);

struct ScanBound {
  double value = 0.0;
  State argmax = 0;
  bool tail_certified = false;
};

// Almost-sure bound on the distance moved by a single jump.
ScanBound jump_bound(const BirthDeathRates& rates, const PathMetric& metric, State scan_limit);

// sup_x [ birth(x) u_x^2 + death(x) u_{x-1}^2 ]; throws DivergentConstantError
// when the scan shows the supremum still growing at the window end.
ScanBound second_moment(const BirthDeathRates& rates, const PathMetric& metric, State scan_limit);

// Same supremum for a finite chain under an arbitrary metric:
// sup_x sum_y rate(x,y) d(x,y)^2.
ScanBound second_moment(const Generator& gen, const Metric& metric, std::span<const State> states);

// Uniform rate floor K and weight/rate compatibility constant C with
//   inf_x birth(x) ^ inf_{x>=1} death(x) >= K,
//   u_x <= C min(death(x+1), birth(x))^{-1/2}.
struct FloorConstants {
  double rate_floor = 0.0;
  double weight_rate_bound = 0.0;
  bool holds = false;
  bool tail_certified = false;
  State violating = -1;  // scan index that broke the floor or drove C upward
};

FloorConstants check_floor_constants(const BirthDeathRates& rates, const PathMetric& metric,
                                     State scan_limit);

struct ComponentConstants {
  double sigma = 0.0;
  double b = 0.0;
  double V2 = 0.0;
};

// Constants for the product chain that moves one coordinate at a time, each
// coordinate at 1/n of its component speed: sigma = min_i sigma_i / n,
// b = max_i b_i, V2 = (1/n) sum_i V2_i.
ComponentConstants tensorize(std::span<const ComponentConstants> components);

// Curvature of a finite chain measured from the semigroup itself: for each
// grid time the worst ratio W(P_t(x,.), P_t(y,.)) / d(x, y) over state pairs
// gives sigma_bar(t) = -log(ratio); the reported sigma is the smallest
// sigma_bar(t)/t over the grid, so it never exceeds a measured value.
CurvatureCertificate estimate_curvature_numeric(const Generator& gen, const Metric& metric,
                                                std::span<const double> t_grid, double tol);

}  // namespace jumpcurve
