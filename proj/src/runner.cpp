#include "jumpcurve/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "jumpcurve/bounds.hpp"
#include "jumpcurve/curvature.hpp"
#include "jumpcurve/simulate.hpp"
#include "jumpcurve/transport.hpp"

namespace jumpcurve {

namespace {

using nlohmann::ordered_json;

// Conditions under which the requested bound does not apply to the model;
// reported with exit code 2 rather than as usage errors.
struct Inapplicable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

const char* method_name(CurvatureMethod m) {
  switch (m) {
    case CurvatureMethod::ExactFormula: return "exact_formula";
    case CurvatureMethod::NumericContraction: return "numeric_contraction";
    case CurvatureMethod::Tensorized: return "tensorized";
  }
  return "unknown";
}

ordered_json report_head(const char* command, const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = command;
  j["config_hash"] = config_hash(cfg);
  if (!cfg.label.empty()) j["label"] = cfg.label;
  return j;
}

ordered_json certificate_json(const CurvatureCertificate& cert) {
  ordered_json j;
  j["sigma"] = cert.sigma;
  j["method"] = method_name(cert.method);
  j["metric"] = cert.metric_id;
  j["truncation"] = cert.truncation;
  j["attained"] = cert.attained;
  if (cert.argmin) j["argmin"] = *cert.argmin;
  if (cert.tail_limit) j["tail_limit"] = *cert.tail_limit;
  j["tail_certified"] = cert.tail_certified;
  if (!cert.t_grid.empty()) {
    j["t_grid"] = cert.t_grid;
    j["sigma_bar"] = cert.sigma_bar;
    j["sigma_over_t"] = cert.sigma_over_t;
    if (cert.small_t_estimate) j["small_t_estimate"] = *cert.small_t_estimate;
    j["worst_pair"] = {cert.worst_pair.first, cert.worst_pair.second};
  }
  return j;
}

void emit(const ordered_json& report, const std::string& csv, const RunOptions& opts,
          std::ostream& out, const char* csv_name) {
  if (opts.format == "csv") {
    out << csv;
  } else {
    out << report.dump(2) << "\n";
  }
  if (opts.out_dir) {
    std::filesystem::create_directories(*opts.out_dir);
    std::ofstream jf(*opts.out_dir + "/report.json", std::ios::binary);
    jf << report.dump(2) << "\n";
    if (!csv.empty()) {
      std::ofstream cf(*opts.out_dir + "/" + csv_name, std::ios::binary);
      cf << csv;
    }
  }
}

void write_extra_file(const RunOptions& opts, const char* name, const std::string& text) {
  if (!opts.out_dir || text.empty()) return;
  std::filesystem::create_directories(*opts.out_dir);
  std::ofstream f(*opts.out_dir + "/" + std::string(name), std::ios::binary);
  f << text;
}

DiscreteMeasure measure_from_pmf(const std::vector<double>& pmf) {
  std::vector<State> support;
  std::vector<double> weights;
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    if (pmf[x] > 0.0) {
      support.push_back(static_cast<State>(x));
      weights.push_back(pmf[x]);
    }
  }
  return DiscreteMeasure::make(std::move(support), std::move(weights));
}

PathMetric base_path_metric(const MetricConfig& metric, State radix) {
  if (metric.kind == "classical") return PathMetric::classical();
  if (metric.kind == "inv_sqrt") return PathMetric::inverse_sqrt();
  if (metric.kind == "table")
    return PathMetric::from_table(metric.weights, metric.tail == "constant"
                                                      ? TailRule::ConstantExtension
                                                      : TailRule::Error);
  if (metric.kind == "trivial") {
    // On two-point coordinates the 0/1 metric and the unit-weight path
    // metric coincide; beyond that no path form exists.
    if (radix == 2) return PathMetric::classical();
    throw std::invalid_argument("trivial coordinate metric beyond two digits has no path form");
  }
  throw std::invalid_argument("metric kind must be set");
}

// Everything the bound machinery needs for a product-of-components model.
struct ProductPieces {
  int dim = 0;
  State radix = 2;
  std::vector<BirthDeathRates> comps;
  std::vector<ComponentConstants> parts;
  ComponentConstants joint;
  CurvatureCertificate cert;
};

ProductPieces product_pipeline(const ExperimentConfig& cfg, const Metric& metric) {
  ProductPieces out;
  if (cfg.model.model == "hypercube") {
    out.dim = cfg.model.dimension;
    out.radix = 2;
    const BirthDeathRates flip =
        BirthDeathRates::custom([](State) { return 0.5; }, [](State) { return 0.5; }).truncated(1);
    out.comps.assign(static_cast<std::size_t>(out.dim), flip);
  } else {
    out.dim = static_cast<int>(cfg.model.components.size());
    out.radix = *cfg.model.components.front().truncation + 1;
    for (const ModelConfig& c : cfg.model.components) out.comps.push_back(make_rates(c));
  }

  const PathMetric base = base_path_metric(cfg.metric, out.radix);
  for (const BirthDeathRates& comp : out.comps) {
    const State scan = *comp.cap() + 1;
    const CurvatureCertificate cc = birth_death_curvature(comp, base, scan);
    const ScanBound jb = jump_bound(comp, base, scan);
    const ScanBound v2 = second_moment(comp, base, scan);
    out.parts.push_back({cc.sigma, jb.value, v2.value});
  }
  out.joint = tensorize(out.parts);

  out.cert.sigma = out.joint.sigma;
  out.cert.method = CurvatureMethod::Tensorized;
  out.cert.metric_id = metric.id();
  out.cert.truncation = out.radix - 1;
  out.cert.attained = true;
  out.cert.tail_certified = true;  // every component scan covers its whole ladder
  return out;
}

State digit_of(State x, int coord, State radix) {
  for (int i = 0; i < coord; ++i) x /= radix;
  return x % radix;
}

State product_size_or_throw(const ProductPieces& pp) {
  double total = 1.0;
  for (int i = 0; i < pp.dim; ++i) total *= static_cast<double>(pp.radix);
  if (total > 4096.0)
    throw std::invalid_argument(
        "observables other than coordinate_sum need at most 4096 product states");
  return static_cast<State>(total);
}

// Constants feeding the deviation bound, plus centering diagnostics.
struct Constants {
  CurvatureCertificate cert;
  double lip = 0.0;
  double b = 0.0;
  double V2 = 0.0;
  std::optional<FloorConstants> floor;
  double center = 0.0;
  double mean_dist = 0.0;
  double bias = 0.0;
};

Constants bound_pipeline(const ExperimentConfig& cfg) {
  Constants out;
  const Observable f = make_observable(cfg.observable, cfg.model);

  if (is_birth_death(cfg.model)) {
    const BirthDeathRates rates = make_rates(cfg.model);
    const auto metric_ptr = make_metric(cfg.metric, cfg.model);
    const auto* pm = dynamic_cast<const PathMetric*>(metric_ptr.get());
    if (!pm) throw std::invalid_argument("deviation bounds on the line need a path metric");

    out.cert = birth_death_curvature(rates, *pm, cfg.scan_limit);
    if (!(out.cert.sigma > 0.0))
      throw Inapplicable("curvature is not positive: sigma = " + g17(out.cert.sigma));

    const LipschitzReport lr = lipschitz_seminorm(f, *pm, cfg.scan_limit);
    if (!lr.attained)
      throw Inapplicable("observable seminorm still growing at scan index " +
                         std::to_string(lr.argmax));
    out.lip = lr.value;
    if (!(out.lip > 0.0)) throw Inapplicable("observable is constant under this metric");

    const ScanBound jb = jump_bound(rates, *pm, cfg.scan_limit);
    const ScanBound v2 = second_moment(rates, *pm, cfg.scan_limit);
    out.b = jb.value;
    out.V2 = v2.value;
    if (cfg.bound_form == "floor") {
      const FloorConstants fc = check_floor_constants(rates, *pm, cfg.scan_limit);
      if (!fc.holds)
        throw Inapplicable("rate floor / weight compatibility fails at scan index " +
                           std::to_string(fc.violating));
      out.floor = fc;
    }

    const StationaryMeasure pi = stationary_measure(rates, std::min(cfg.tol, 1e-12));
    out.center = cfg.center ? *cfg.center : stationary_integral(rates, pi, f).first;
    const DiscreteMeasure pim = measure_from_pmf(pi.pmf);
    out.mean_dist =
        wasserstein_path_1d(DiscreteMeasure::point_mass(cfg.start_state), pim, *pm);
    out.bias = bias_term(out.cert.sigma, cfg.horizon, out.lip, out.mean_dist);
    return out;
  }

  if (cfg.model.model == "hypercube" || cfg.model.model == "product") {
    if (cfg.bound_form == "floor")
      throw std::invalid_argument("the floor bound form needs a birth-death model");
    const auto metric_ptr = make_metric(cfg.metric, cfg.model);
    const ProductPieces pp = product_pipeline(cfg, *metric_ptr);
    out.cert = pp.cert;
    if (!(out.cert.sigma > 0.0))
      throw Inapplicable("curvature is not positive: sigma = " + g17(out.cert.sigma));
    out.b = pp.joint.b;
    out.V2 = pp.joint.V2;

    const PathMetric base = base_path_metric(cfg.metric, pp.radix);
    std::vector<StationaryMeasure> comp_pi;
    comp_pi.reserve(pp.comps.size());
    for (const BirthDeathRates& comp : pp.comps)
      comp_pi.push_back(stationary_measure(comp, std::min(cfg.tol, 1e-12)));

    if (cfg.observable.kind == "coordinate_sum") {
      // One coordinate move changes the sum by |a - b|, so the seminorm is
      // the worst digit pair under the coordinate metric.
      double lip = 0.0;
      for (State a = 0; a < pp.radix; ++a)
        for (State b = a + 1; b < pp.radix; ++b)
          lip = std::max(lip, static_cast<double>(b - a) / base.distance(a, b));
      out.lip = lip;
      double center = 0.0;
      for (int i = 0; i < pp.dim; ++i) {
        const auto& pmf = comp_pi[static_cast<std::size_t>(i)].pmf;
        for (std::size_t d = 0; d < pmf.size(); ++d) center += pmf[d] * static_cast<double>(d);
      }
      out.center = cfg.center ? *cfg.center : center;
    } else {
      // Small product spaces: exact pair scan for the seminorm and the exact
      // product stationary law for the center.
      const State total = product_size_or_throw(pp);
      double lip = 0.0;
      for (State x = 0; x < total; ++x) {
        for (State y = x + 1; y < total; ++y) {
          const double d = metric_ptr->distance(x, y);
          if (d > 0.0) lip = std::max(lip, std::abs(f(y) - f(x)) / d);
        }
      }
      out.lip = lip;
      double center = 0.0;
      for (State x = 0; x < total; ++x) {
        double px = 1.0;
        for (int i = 0; i < pp.dim; ++i) {
          const auto& pmf = comp_pi[static_cast<std::size_t>(i)].pmf;
          const State d = digit_of(x, i, pp.radix);
          px *= d < static_cast<State>(pmf.size()) ? pmf[static_cast<std::size_t>(d)] : 0.0;
        }
        center += px * f(x);
      }
      out.center = cfg.center ? *cfg.center : center;
    }
    if (!(out.lip > 0.0)) throw Inapplicable("observable is constant under this metric");

    // Coordinatewise coupling is optimal for an l1 cost between product laws,
    // so the start-to-stationary distance is the sum of digit distances.
    double mean_dist = 0.0;
    for (int i = 0; i < pp.dim; ++i) {
      const DiscreteMeasure pim = measure_from_pmf(comp_pi[static_cast<std::size_t>(i)].pmf);
      const State digit = digit_of(cfg.start_state, i, pp.radix);
      mean_dist += wasserstein_path_1d(DiscreteMeasure::point_mass(digit), pim, base);
    }
    out.mean_dist = mean_dist;
    out.bias = bias_term(out.cert.sigma, cfg.horizon, out.lip, out.mean_dist);
    return out;
  }

  throw std::invalid_argument("deviation bounds need a birth-death or product model");
}

ordered_json constants_json(const Constants& c) {
  ordered_json j;
  j["sigma"] = c.cert.sigma;
  j["b"] = c.b;
  j["V2"] = c.V2;
  j["lip"] = c.lip;
  if (c.floor) {
    j["rate_floor"] = c.floor->rate_floor;
    j["weight_rate_bound"] = c.floor->weight_rate_bound;
  }
  j["center"] = c.center;
  j["mean_dist"] = c.mean_dist;
  j["bias"] = c.bias;
  return j;
}

struct CurvePoint {
  double y = 0.0;
  DeviationBound bound;
};

std::vector<CurvePoint> evaluate_curve(const ExperimentConfig& cfg, const Constants& c) {
  if (cfg.y_grid.empty()) throw std::invalid_argument("bound evaluation needs a y_grid");
  BoundParams params;
  params.sigma = c.cert.sigma;
  params.b = c.b;
  params.V2 = c.V2;
  params.lip = c.lip;
  params.horizon = cfg.horizon;

  std::vector<CurvePoint> curve;
  curve.reserve(cfg.y_grid.size());
  for (double y : cfg.y_grid) {
    CurvePoint p;
    p.y = y;
    p.bound = c.floor ? empirical_mean_bound_floor(c.floor->rate_floor,
                                                   c.floor->weight_rate_bound, params.sigma,
                                                   params.lip, params.horizon, y)
                      : empirical_mean_bound(params, y);
    curve.push_back(p);
  }
  return curve;
}

ordered_json curve_json(const std::vector<CurvePoint>& curve, double bias) {
  ordered_json arr = ordered_json::array();
  for (const CurvePoint& p : curve) {
    ordered_json row;
    row["y"] = p.y;
    row["exponent"] = p.bound.exponent;
    row["bound"] = p.bound.probability;
    row["bias"] = bias;
    arr.push_back(row);
  }
  return arr;
}

std::string curve_csv(const std::vector<CurvePoint>& curve, double bias) {
  std::string text = "y,exponent,bound,bias\n";
  for (const CurvePoint& p : curve)
    text += g17(p.y) + "," + g17(p.bound.exponent) + "," + g17(p.bound.probability) + "," +
            g17(bias) + "\n";
  return text;
}

ordered_json estimate_json(const TailEstimate& est) {
  ordered_json j;
  j["y_grid"] = est.y_grid;
  j["hits"] = est.hits;
  j["raw_hits"] = est.raw_hits;
  j["p_hat"] = est.p_hat;
  j["p_upper"] = est.p_upper;
  j["replicas"] = est.replicas;
  j["alpha"] = est.alpha;
  j["bias"] = est.bias;
  j["seed"] = est.seed;
  return j;
}

std::string estimate_csv(const TailEstimate& est) {
  std::string text = "y,hits,raw_hits,p_hat,p_upper\n";
  for (std::size_t i = 0; i < est.y_grid.size(); ++i)
    text += g17(est.y_grid[i]) + "," + std::to_string(est.hits[i]) + "," +
            std::to_string(est.raw_hits[i]) + "," + g17(est.p_hat[i]) + "," +
            g17(est.p_upper[i]) + "\n";
  return text;
}

double default_center(const ExperimentConfig& cfg) {
  if (cfg.center) return *cfg.center;
  const Observable f = make_observable(cfg.observable, cfg.model);
  if (is_birth_death(cfg.model)) {
    const BirthDeathRates rates = make_rates(cfg.model);
    const StationaryMeasure pi = stationary_measure(rates, std::min(cfg.tol, 1e-12));
    return stationary_integral(rates, pi, f).first;
  }
  if (cfg.model.model == "hypercube" || cfg.model.model == "product")
    return bound_pipeline(cfg).center;
  throw std::invalid_argument("this model needs an explicit center in the config");
}

}  // namespace

int run_curvature(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
  try {
    std::string method = cfg.method;
    if (method == "auto") {
      if (is_birth_death(cfg.model)) method = "exact";
      else if (cfg.model.model == "hypercube" || cfg.model.model == "product") method = "tensorized";
      else method = "numeric";
    }

    CurvatureCertificate cert;
    if (method == "exact") {
      if (!is_birth_death(cfg.model))
        throw std::invalid_argument("the exact formula needs a birth-death model");
      const BirthDeathRates rates = make_rates(cfg.model);
      const auto metric_ptr = make_metric(cfg.metric, cfg.model);
      const auto* pm = dynamic_cast<const PathMetric*>(metric_ptr.get());
      if (!pm) throw std::invalid_argument("the exact formula needs a path metric");
      cert = birth_death_curvature(rates, *pm, cfg.scan_limit);
    } else if (method == "tensorized") {
      if (cfg.model.model != "hypercube" && cfg.model.model != "product")
        throw std::invalid_argument("tensorized curvature needs a product model");
      const auto metric_ptr = make_metric(cfg.metric, cfg.model);
      cert = product_pipeline(cfg, *metric_ptr).cert;
    } else {
      const Generator gen = make_generator(cfg.model);
      const auto metric_ptr = make_metric(cfg.metric, cfg.model);
      std::vector<double> grid = cfg.t_grid;
      if (grid.empty()) grid = {0.5, 1.0, 2.0, 4.0};
      cert = estimate_curvature_numeric(gen, *metric_ptr, grid, cfg.tol);
    }

    ordered_json report = report_head("curvature", cfg);
    report["curvature"] = certificate_json(cert);

    std::string csv;
    if (!cert.t_grid.empty()) {
      csv = "t,sigma_bar,sigma_over_t\n";
      for (std::size_t i = 0; i < cert.t_grid.size(); ++i)
        csv += g17(cert.t_grid[i]) + "," + g17(cert.sigma_bar[i]) + "," +
               g17(cert.sigma_over_t[i]) + "\n";
    } else {
      csv = "sigma,attained,tail_certified\n" + g17(cert.sigma) + "," +
            (cert.attained ? "1" : "0") + "," + (cert.tail_certified ? "1" : "0") + "\n";
    }
    emit(report, csv, opts, out, "curve.csv");
    if (!(cert.sigma > 0.0)) {
      std::cerr << "inapplicable: curvature is not positive: sigma = " << g17(cert.sigma) << "\n";
      return 2;
    }
    return 0;
  } catch (const Inapplicable& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const TruncationError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const DivergentConstantError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const NonErgodicError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_bound(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
  try {
    const Constants c = bound_pipeline(cfg);
    const std::vector<CurvePoint> curve = evaluate_curve(cfg, c);

    ordered_json report = report_head("bound", cfg);
    report["curvature"] = certificate_json(c.cert);
    report["constants"] = constants_json(c);
    report["bound_form"] = cfg.bound_form;
    report["curve"] = curve_json(curve, c.bias);
    emit(report, curve_csv(curve, c.bias), opts, out, "curve.csv");
    return 0;
  } catch (const Inapplicable& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const TruncationError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const DivergentConstantError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const NonErgodicError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_simulate(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
  try {
    if (cfg.y_grid.empty() && cfg.tau_grid.empty() && !cfg.dump_path)
      throw std::invalid_argument("simulate needs a y_grid, a tau_grid, or dump_path");
    const Generator gen = make_generator(cfg.model);
    const Observable f = make_observable(cfg.observable, cfg.model);

    ordered_json report = report_head("simulate", cfg);
    std::string primary_csv;

    std::optional<TailEstimate> tail;
    if (!cfg.y_grid.empty()) {
      const double center = default_center(cfg);
      tail = estimate_tail(gen, f, center, cfg.start_state, cfg.horizon, cfg.y_grid,
                           cfg.replicas, cfg.alpha, cfg.seed, 0.0, cfg.workers);
      report["center"] = center;
      report["estimate"] = estimate_json(*tail);
      primary_csv = estimate_csv(*tail);
    }

    if (!cfg.tau_grid.empty()) {
      const LaplaceEstimate lap = empirical_laplace(gen, f, cfg.start_state, cfg.horizon,
                                                    cfg.tau_grid, cfg.replicas, cfg.seed,
                                                    1.0 - cfg.alpha, cfg.workers);
      ordered_json lj;
      lj["tau_grid"] = lap.tau_grid;
      lj["value"] = lap.value;
      lj["upper"] = lap.upper;
      lj["overflowed"] = lap.overflowed;
      lj["replicas"] = lap.replicas;
      report["laplace"] = lj;
      std::string csv = "tau,value,upper,overflowed\n";
      for (std::size_t i = 0; i < lap.tau_grid.size(); ++i)
        csv += g17(lap.tau_grid[i]) + "," + g17(lap.value[i]) + "," + g17(lap.upper[i]) + "," +
               (lap.overflowed[i] ? "1" : "0") + "\n";
      write_extra_file(opts, "laplace.csv", csv);
      if (primary_csv.empty()) primary_csv = csv;
    }

    if (cfg.dump_path) {
      const PathRecord path = simulate_path(gen, cfg.start_state, cfg.horizon, cfg.seed, 0);
      std::string csv = "time,state\n";
      for (std::size_t k = 0; k < path.times.size(); ++k)
        csv += g17(path.times[k]) + "," + std::to_string(path.states[k]) + "\n";
      write_extra_file(opts, "path.csv", csv);
      report["path_jumps"] = static_cast<std::int64_t>(path.times.size()) - 1;
      if (primary_csv.empty()) primary_csv = csv;
    }

    emit(report, primary_csv, opts, out, "estimate.csv");
    return 0;
  } catch (const TruncationError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const NonErgodicError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const ExplosionSuspectError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_verify(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
  try {
    const Constants c = bound_pipeline(cfg);
    const std::vector<CurvePoint> curve = evaluate_curve(cfg, c);
    const Generator gen = make_generator(cfg.model);
    const Observable f = make_observable(cfg.observable, cfg.model);

    // The Monte Carlo tail measures the exact event the bound controls:
    // deviation from the stationary integral by at least y plus the
    // start-point bias.
    const TailEstimate tail =
        estimate_tail(gen, f, c.center, cfg.start_state, cfg.horizon, cfg.y_grid, cfg.replicas,
                      cfg.alpha, cfg.seed, c.bias, cfg.workers);

    bool refuted = false;
    double offending = 0.0;
    ordered_json verdicts = ordered_json::array();
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const bool ok = tail.p_upper[i] <= curve[i].bound.probability;
      if (!ok && !refuted) {
        refuted = true;
        offending = curve[i].y;
      }
      ordered_json v;
      v["y"] = curve[i].y;
      v["bound"] = curve[i].bound.probability;
      v["upper"] = tail.p_upper[i];
      v["ok"] = ok;
      verdicts.push_back(v);
    }

    ordered_json report = report_head("verify", cfg);
    report["curvature"] = certificate_json(c.cert);
    report["constants"] = constants_json(c);
    report["bound_form"] = cfg.bound_form;
    report["curve"] = curve_json(curve, c.bias);
    report["estimate"] = estimate_json(tail);
    report["verdicts"] = verdicts;
    report["verdict"] = refuted ? "refuted" : "verified";

    std::string csv = "y,exponent,bound,bias,hits,p_hat,p_upper,ok\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
      csv += g17(curve[i].y) + "," + g17(curve[i].bound.exponent) + "," +
             g17(curve[i].bound.probability) + "," + g17(c.bias) + "," +
             std::to_string(tail.hits[i]) + "," + g17(tail.p_hat[i]) + "," +
             g17(tail.p_upper[i]) + "," + (verdicts[i]["ok"].get<bool>() ? "1" : "0") + "\n";
    emit(report, csv, opts, out, "verify.csv");

    if (refuted) {
      std::cerr << "refuted: confidence bound exceeds the deviation bound at y = "
                << g17(offending) << "\n";
      return 3;
    }
    return 0;
  } catch (const Inapplicable& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const TruncationError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const DivergentConstantError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const NonErgodicError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const ExplosionSuspectError& e) {
    std::cerr << "inapplicable: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_transport(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
  try {
    if (cfg.mu_support.empty() || cfg.nu_support.empty())
      throw std::invalid_argument("transport needs mu and nu measures");
    const DiscreteMeasure mu = DiscreteMeasure::make(cfg.mu_support, cfg.mu_weights);
    const DiscreteMeasure nu = DiscreteMeasure::make(cfg.nu_support, cfg.nu_weights);
    const auto metric_ptr = make_metric(cfg.metric, cfg.model);

    const TransportResult primal = wasserstein_primal(mu, nu, *metric_ptr);
    const DualCertificate cert = dual_certificate(mu, nu, *metric_ptr, primal.distance, cfg.tol);

    ordered_json report = report_head("transport", cfg);
    report["distance"] = primal.distance;
    if (const auto* pm = dynamic_cast<const PathMetric*>(metric_ptr.get()))
      report["line_formula"] = wasserstein_path_1d(mu, nu, *pm);

    ordered_json arcs = ordered_json::array();
    std::string csv = "from,to,flow\n";
    for (std::size_t i = 0; i < primal.plan.from.size(); ++i) {
      for (std::size_t j = 0; j < primal.plan.to.size(); ++j) {
        const double flow = primal.plan.at(i, j);
        if (flow <= 0.0) continue;
        arcs.push_back({primal.plan.from[i], primal.plan.to[j], flow});
        csv += std::to_string(primal.plan.from[i]) + "," + std::to_string(primal.plan.to[j]) +
               "," + g17(flow) + "\n";
      }
    }
    report["plan"] = arcs;

    ordered_json dual;
    dual["objective"] = cert.objective;
    dual["lip"] = cert.lip;
    dual["verified"] = cert.verified;
    report["dual"] = dual;

    emit(report, csv, opts, out, "plan.csv");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace jumpcurve
