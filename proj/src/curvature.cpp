#include "jumpcurve/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpcurve/transport.hpp"

namespace jumpcurve {

namespace {

// Weights always enter multiplied by a rate; never evaluate u at an index the
// rate has already zeroed (it may sit past a bare table's end).
double rate_times_weight(double rate, const PathMetric& metric, State index) {
  return rate > 0.0 ? rate * metric.weight(index) : 0.0;
}

bool eventually_constant_weights(const PathMetric& metric) {
  return metric.form() == WeightForm::Classical ||
         (metric.form() == WeightForm::Table && metric.tail() == TailRule::ConstantExtension);
}

// Scan window large enough that closed-form tails apply beyond it. Tables
// without a tail rule are left alone: reading past them is a hard error by
// design, so the caller's window must fit the table.
State tail_safe_limit(const PathMetric& metric, State scan_limit) {
  if (metric.form() == WeightForm::Table && metric.tail() == TailRule::ConstantExtension)
    return std::max(scan_limit, metric.table_size() + 2);
  return scan_limit;
}

}  // namespace

double curvature_expression(const BirthDeathRates& rates, const PathMetric& metric, State x) {
  if (x < 0) throw std::invalid_argument("curvature expression index must be nonnegative");
  const double ux = metric.weight(x);
  double value = rates.death(x + 1) + rates.birth(x);
  value -= rate_times_weight(rates.death(x), metric, x - 1) / ux;
  value -= rate_times_weight(rates.birth(x + 1), metric, x + 1) / ux;
  return value;
}

CurvatureCertificate birth_death_curvature(const BirthDeathRates& rates, const PathMetric& metric,
                                           State scan_limit) {
  if (scan_limit < 1) throw std::invalid_argument("curvature scan window must be nonempty");

  CurvatureCertificate cert;
  cert.method = CurvatureMethod::ExactFormula;
  cert.metric_id = metric.id();

  State window = rates.cap() ? *rates.cap() : tail_safe_limit(metric, scan_limit);
  cert.truncation = window;

  double scan_min = std::numeric_limits<double>::infinity();
  State argmin = 0;
  for (State x = 0; x < window; ++x) {
    const double value = curvature_expression(rates, metric, x);
    if (value < scan_min) {
      scan_min = value;
      argmin = x;
    }
  }

  if (rates.cap()) {
    // Finite ladder: the scan is the whole infimum.
    cert.sigma = scan_min;
    cert.attained = true;
    cert.argmin = argmin;
    cert.tail_certified = true;
    return cert;
  }

  std::optional<double> tail;
  const bool known_rates =
      rates.form() == RateForm::MMInfinity || rates.form() == RateForm::ConstantRates;
  if (known_rates) {
    if (metric.form() == WeightForm::InverseSqrt) {
      // death(x+1) - death(x) u_{x-1}/u_x -> nu/2 and the birth terms cancel
      // in the limit; for constant death rates both differences vanish.
      tail = rates.form() == RateForm::MMInfinity ? rates.mm_nu() / 2.0 : 0.0;
    } else if (eventually_constant_weights(metric)) {
      // Equal adjacent weights leave death(x+1) - death(x).
      tail = rates.form() == RateForm::MMInfinity ? rates.mm_nu() : 0.0;
    }
  }

  cert.tail_limit = tail;
  cert.tail_certified = tail.has_value();
  if (tail && *tail < scan_min) {
    cert.sigma = *tail;
    cert.attained = false;
  } else {
    cert.sigma = scan_min;
    cert.attained = true;
    cert.argmin = argmin;
  }
  return cert;
}

double coupling_drift(const BirthDeathRates& rates, const PathMetric& metric, State x, State y) {
  if (x < 0 || y < 0) throw std::invalid_argument("coupling drift states must be nonnegative");
  if (x > y) return -coupling_drift(rates, metric, y, x);
  if (x == y) return 0.0;
  auto one_sided = [&](State s) {
    double v = rate_times_weight(rates.birth(s), metric, s);
    if (s >= 1) v -= rate_times_weight(rates.death(s), metric, s - 1);
    return v;
  };
  return one_sided(y) - one_sided(x);
}

ScanBound jump_bound(const BirthDeathRates& rates, const PathMetric& metric, State scan_limit) {
  if (scan_limit < 1) throw std::invalid_argument("jump bound scan window must be nonempty");
  const State window = rates.cap() ? *rates.cap() : tail_safe_limit(metric, scan_limit);

  ScanBound out;
  for (State x = 0; x <= window; ++x) {
    double step = 0.0;
    if (rates.birth(x) > 0.0) step = std::max(step, metric.weight(x));
    if (x >= 1 && rates.death(x) > 0.0) step = std::max(step, metric.weight(x - 1));
    if (step > out.value) {
      out.value = step;
      out.argmax = x;
    }
  }
  // Every weight family in use has a nonincreasing or constant tail, so the
  // scanned supremum is global; bare tables are certified only if the window
  // covered the whole table.
  out.tail_certified = rates.cap().has_value() || metric.form() != WeightForm::Table ||
                       metric.tail() == TailRule::ConstantExtension || window >= metric.table_size();
  return out;
}

namespace {

// Trend check shared by the open-ended suprema: growing values at the window
// end mean no finite constant can be certified from the scan.
bool scan_diverging(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 16) return false;
  const std::size_t tail_start = n - n / 10 - 1;
  double max_all = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] > max_all) {
      max_all = values[i];
      argmax = i;
    }
  }
  return argmax >= tail_start && values[n - 1] > values[n / 2];
}

// Mirror image for infima: a running minimum still falling at the window end
// means the floor cannot be trusted from the scan.
bool scan_vanishing(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 16) return false;
  const std::size_t tail_start = n - n / 10 - 1;
  double min_all = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] < min_all) {
      min_all = values[i];
      argmin = i;
    }
  }
  return argmin >= tail_start && values[n - 1] < values[n / 2];
}

}  // namespace

ScanBound second_moment(const BirthDeathRates& rates, const PathMetric& metric, State scan_limit) {
  if (scan_limit < 1) throw std::invalid_argument("second moment scan window must be nonempty");
  const State window = rates.cap() ? *rates.cap() : tail_safe_limit(metric, scan_limit);

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(window) + 1);
  for (State x = 0; x <= window; ++x) {
    const double ux = rates.birth(x) > 0.0 ? metric.weight(x) : 0.0;
    const double ud = (x >= 1 && rates.death(x) > 0.0) ? metric.weight(x - 1) : 0.0;
    values.push_back(rates.birth(x) * ux * ux + rates.death(x) * ud * ud);
  }

  ScanBound out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > out.value) {
      out.value = values[i];
      out.argmax = static_cast<State>(i);
    }
  }

  if (rates.cap()) {
    out.tail_certified = true;
    return out;
  }

  const bool known_rates =
      rates.form() == RateForm::MMInfinity || rates.form() == RateForm::ConstantRates;
  if (known_rates && metric.form() == WeightForm::InverseSqrt) {
    // birth(x)/(x+1) + death(x)/x settles at nu (infinite-server) or falls
    // to zero (constant rates); either way the scan catches the supremum.
    if (rates.form() == RateForm::MMInfinity) out.value = std::max(out.value, rates.mm_nu());
    out.tail_certified = true;
    return out;
  }
  if (rates.form() == RateForm::MMInfinity && eventually_constant_weights(metric)) {
    throw DivergentConstantError(
        "expected squared jump distance grows linearly: death rates climb while weights stay level");
  }
  if (rates.form() == RateForm::ConstantRates && eventually_constant_weights(metric)) {
    out.tail_certified = true;
    return out;
  }
  if (scan_diverging(values)) {
    throw DivergentConstantError("expected squared jump distance still growing at the scan end");
  }
  out.tail_certified = false;
  return out;
}

ScanBound second_moment(const Generator& gen, const Metric& metric, std::span<const State> states) {
  if (states.empty()) throw std::invalid_argument("second moment needs states to scan");
  ScanBound out;
  for (State x : states) {
    double value = 0.0;
    for (const JumpEntry& e : gen.jumps(x)) {
      const double d = metric.distance(x, e.target);
      value += e.rate * d * d;
    }
    if (value > out.value) {
      out.value = value;
      out.argmax = x;
    }
  }
  out.tail_certified = true;
  return out;
}

FloorConstants check_floor_constants(const BirthDeathRates& rates, const PathMetric& metric,
                                     State scan_limit) {
  if (scan_limit < 1) throw std::invalid_argument("floor constants scan window must be nonempty");
  const State window = rates.cap() ? *rates.cap() : tail_safe_limit(metric, scan_limit);

  FloorConstants out;
  double floor = std::numeric_limits<double>::infinity();
  State floor_arg = 0;
  std::vector<double> rate_values;
  std::vector<double> c_values;
  rate_values.reserve(static_cast<std::size_t>(window));
  c_values.reserve(static_cast<std::size_t>(window));
  for (State x = 0; x < window; ++x) {
    const double birth = rates.birth(x);
    const double death = rates.death(x + 1);
    rate_values.push_back(std::min(birth, death));
    if (std::min(birth, death) < floor) {
      floor = std::min(birth, death);
      floor_arg = x;
    }
    c_values.push_back(metric.weight(x) * std::sqrt(std::max(death, birth)));
  }
  out.rate_floor = floor;

  for (std::size_t i = 0; i < c_values.size(); ++i) {
    if (c_values[i] > out.weight_rate_bound) {
      out.weight_rate_bound = c_values[i];
      out.violating = static_cast<State>(i);
    }
  }

  if (!(floor > 0.0)) {
    out.holds = false;
    out.violating = floor_arg;
    return out;
  }

  const bool known_tail = rates.cap().has_value() ||
                          (rates.form() == RateForm::MMInfinity && metric.form() == WeightForm::InverseSqrt) ||
                          (rates.form() == RateForm::ConstantRates && metric.form() == WeightForm::InverseSqrt);
  if (!known_tail && (scan_diverging(c_values) || scan_vanishing(rate_values))) {
    out.holds = false;
    out.violating = floor_arg;
    return out;
  }
  out.tail_certified = known_tail;
  if (rates.form() == RateForm::MMInfinity && metric.form() == WeightForm::InverseSqrt) {
    // u_x sqrt(max(nu (x+1), lambda)) -> sqrt(nu).
    out.weight_rate_bound = std::max(out.weight_rate_bound, std::sqrt(rates.mm_nu()));
  }
  out.holds = true;
  return out;
}

ComponentConstants tensorize(std::span<const ComponentConstants> components) {
  if (components.empty()) throw std::invalid_argument("tensorize needs at least one component");
  const double n = static_cast<double>(components.size());
  ComponentConstants out;
  out.sigma = std::numeric_limits<double>::infinity();
  for (const ComponentConstants& c : components) {
    if (!(c.sigma > 0.0) || !(c.b > 0.0) || !(c.V2 > 0.0))
      throw std::invalid_argument("tensorize needs positive component constants");
    out.sigma = std::min(out.sigma, c.sigma / n);
    out.b = std::max(out.b, c.b);
    out.V2 += c.V2 / n;
  }
  return out;
}

namespace {

DiscreteMeasure row_measure(const std::vector<State>& states, const std::vector<double>& row) {
  std::vector<State> support;
  std::vector<double> weights;
  double total = 0.0;
  for (double w : row) total += w;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] > 0.0) {
      support.push_back(states[k]);
      weights.push_back(row[k] / total);
    }
  }
  return DiscreteMeasure::make(std::move(support), std::move(weights));
}

}  // namespace

CurvatureCertificate estimate_curvature_numeric(const Generator& gen, const Metric& metric,
                                                std::span<const double> t_grid, double tol) {
  if (!gen.finite_states()) throw std::invalid_argument("numeric curvature needs a finite chain");
  if (t_grid.empty()) throw std::invalid_argument("numeric curvature needs a time grid");
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("numeric curvature grid times must be positive");
  }

  const std::vector<State>& states = *gen.finite_states();
  const auto* path = dynamic_cast<const PathMetric*>(&metric);

  CurvatureCertificate cert;
  cert.method = CurvatureMethod::NumericContraction;
  cert.metric_id = metric.id();
  cert.truncation = states.back();

  std::vector<double> grid(t_grid.begin(), t_grid.end());
  std::sort(grid.begin(), grid.end());

  cert.sigma = std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const SemigroupRows rows = semigroup_rows(gen, t, states, states, tol);
    std::vector<DiscreteMeasure> laws;
    laws.reserve(states.size());
    for (const auto& row : rows.rows) laws.push_back(row_measure(states, row));

    double worst = 0.0;
    std::pair<State, State> worst_pair{states[0], states[0]};
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (std::size_t j = i + 1; j < states.size(); ++j) {
        const double d = metric.distance(states[i], states[j]);
        if (d <= 0.0) continue;
        const double w = path ? wasserstein_path_1d(laws[i], laws[j], *path)
                              : wasserstein_primal(laws[i], laws[j], metric).distance;
        const double ratio = w / d;
        if (ratio > worst) {
          worst = ratio;
          worst_pair = {states[i], states[j]};
        }
      }
    }
    if (worst <= 0.0) continue;  // fully mixed at this t, no information

    const double sigma_bar = -std::log(worst);
    cert.t_grid.push_back(t);
    cert.sigma_bar.push_back(sigma_bar);
    cert.sigma_over_t.push_back(sigma_bar / t);
    if (cert.t_grid.size() == 1) {
      cert.small_t_estimate = sigma_bar / t;
      cert.worst_pair = worst_pair;
    }
    cert.sigma = std::min(cert.sigma, sigma_bar / t);
  }
  if (cert.t_grid.empty())
    throw std::invalid_argument("numeric curvature found no usable grid time (chain fully mixed)");
  return cert;
}

}  // namespace jumpcurve
