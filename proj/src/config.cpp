#include "jumpcurve/config.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace jumpcurve {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("config: " + what); }

void check_keys(const ordered_json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) bad(std::string(where) + " must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) bad("unknown key \"" + item.key() + "\" in " + where);
}

double get_number(const ordered_json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

std::vector<double> get_doubles(const ordered_json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) bad(std::string(key) + " must be an array");
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) bad(std::string(key) + " entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<State> get_states(const ordered_json& j, const char* key) {
  std::vector<State> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) bad(std::string(key) + " must be an array");
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer()) bad(std::string(key) + " entries must be integers");
    out.push_back(v.get<State>());
  }
  return out;
}

std::string get_string(const ordered_json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) bad(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

ModelConfig parse_model(const ordered_json& j);

std::vector<ModelConfig> parse_components(const ordered_json& j) {
  std::vector<ModelConfig> out;
  if (!j.is_array()) bad("components must be an array");
  for (const auto& c : j) out.push_back(parse_model(c));
  return out;
}

ModelConfig parse_model(const ordered_json& j) {
  check_keys(j,
             {"model", "lambda", "nu", "truncation", "dimension", "birth", "death", "components",
              "copies", "component", "states", "jumps"},
             "model");
  ModelConfig m;
  m.model = get_string(j, "model", "");
  if (m.model.empty()) bad("model requires a \"model\" kind");

  if (m.model == "mm_infinity") {
    m.lambda = get_number(j, "lambda", 0.0);
    m.nu = get_number(j, "nu", 0.0);
    if (!(m.lambda > 0.0) || !(m.nu > 0.0)) bad("mm_infinity needs positive lambda and nu");
    if (j.contains("truncation")) m.truncation = j.at("truncation").get<State>();
  } else if (m.model == "birth_death") {
    m.birth = get_doubles(j, "birth");
    m.death = get_doubles(j, "death");
    if (m.birth.empty() || m.birth.size() != m.death.size())
      bad("birth_death needs birth and death tables of equal positive length");
    for (double r : m.birth)
      if (!(r > 0.0) || !std::isfinite(r)) bad("birth rates must be positive and finite");
    for (double r : m.death)
      if (!(r > 0.0) || !std::isfinite(r)) bad("death rates must be positive and finite");
    m.truncation = static_cast<State>(m.birth.size());
  } else if (m.model == "hypercube") {
    const double dim = get_number(j, "dimension", 0.0);
    m.dimension = static_cast<int>(dim);
    if (m.dimension < 1 || m.dimension > 22) bad("hypercube dimension must be in [1, 22]");
  } else if (m.model == "product") {
    if (j.contains("components")) {
      m.components = parse_components(j.at("components"));
    } else if (j.contains("component")) {
      const ModelConfig one = parse_model(j.at("component"));
      const double copies = get_number(j, "copies", 0.0);
      m.copies = static_cast<int>(copies);
      if (m.copies < 1) bad("product with a single component needs copies >= 1");
      m.components.assign(static_cast<std::size_t>(m.copies), one);
    } else {
      bad("product needs components or component+copies");
    }
    if (m.components.empty()) bad("product needs at least one component");
    for (const ModelConfig& c : m.components)
      if (!c.truncation) bad("product components must be finite (truncated)");
  } else if (m.model == "explicit") {
    m.states = get_states(j, "states");
    if (m.states.empty()) bad("explicit model needs states");
    if (!j.contains("jumps") || !j.at("jumps").is_array()) bad("explicit model needs jumps");
    for (const auto& arc : j.at("jumps")) {
      if (!arc.is_array() || arc.size() != 3) bad("each jump must be [from, to, rate]");
      m.jumps.push_back({arc[0].get<double>(), arc[1].get<double>(), arc[2].get<double>()});
    }
  } else {
    bad("unknown model \"" + m.model + "\"");
  }
  return m;
}

ordered_json model_to_json(const ModelConfig& m) {
  ordered_json j;
  j["model"] = m.model;
  if (m.model == "mm_infinity") {
    j["lambda"] = m.lambda;
    j["nu"] = m.nu;
    if (m.truncation) j["truncation"] = *m.truncation;
  } else if (m.model == "birth_death") {
    j["birth"] = m.birth;
    j["death"] = m.death;
  } else if (m.model == "hypercube") {
    j["dimension"] = m.dimension;
  } else if (m.model == "product") {
    ordered_json parts = ordered_json::array();
    for (const ModelConfig& c : m.components) parts.push_back(model_to_json(c));
    j["components"] = parts;
  } else if (m.model == "explicit") {
    j["states"] = m.states;
    ordered_json arcs = ordered_json::array();
    for (const auto& a : m.jumps) arcs.push_back({a[0], a[1], a[2]});
    j["jumps"] = arcs;
  }
  return j;
}

MetricConfig parse_metric(const ordered_json& j) {
  check_keys(j, {"kind", "weights", "tail"}, "metric");
  MetricConfig m;
  m.kind = get_string(j, "kind", "");
  if (m.kind != "classical" && m.kind != "inv_sqrt" && m.kind != "trivial" && m.kind != "table")
    bad("metric kind must be classical, inv_sqrt, trivial, or table");
  if (m.kind == "table") {
    m.weights = get_doubles(j, "weights");
    if (m.weights.empty()) bad("table metric needs weights");
    m.tail = get_string(j, "tail", "error");
    if (m.tail != "error" && m.tail != "constant") bad("metric tail must be error or constant");
  }
  return m;
}

ordered_json metric_to_json(const MetricConfig& m) {
  ordered_json j;
  j["kind"] = m.kind;
  if (m.kind == "table") {
    j["weights"] = m.weights;
    j["tail"] = m.tail;
  }
  return j;
}

ObservableConfig parse_observable(const ordered_json& j) {
  check_keys(j, {"kind", "threshold", "values", "tail"}, "observable");
  ObservableConfig o;
  o.kind = get_string(j, "kind", "");
  if (o.kind == "indicator") {
    o.threshold = get_number(j, "threshold", 0.0);
  } else if (o.kind == "table") {
    o.values = get_doubles(j, "values");
    if (o.values.empty()) bad("table observable needs values");
    o.tail = get_string(j, "tail", "error");
    if (o.tail != "error" && o.tail != "constant") bad("observable tail must be error or constant");
  } else if (o.kind != "identity" && o.kind != "sqrt" && o.kind != "coordinate_sum") {
    bad("observable kind must be identity, sqrt, indicator, table, or coordinate_sum");
  }
  return o;
}

ordered_json observable_to_json(const ObservableConfig& o) {
  ordered_json j;
  j["kind"] = o.kind;
  if (o.kind == "indicator") j["threshold"] = o.threshold;
  if (o.kind == "table") {
    j["values"] = o.values;
    j["tail"] = o.tail;
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const ordered_json& j) {
  check_keys(j,
             {"schema", "label", "model", "metric", "observable", "horizon", "y_grid", "t_grid",
              "tau_grid", "replicas", "seed", "alpha", "tol", "start_state", "scan_limit",
              "center", "bound_form", "method", "dump_path", "workers", "mu", "nu"},
             "config");
  if (!j.contains("schema") || !j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1)
    bad("schema must be the integer 1");

  ExperimentConfig c;
  c.label = get_string(j, "label", "");
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("metric")) c.metric = parse_metric(j.at("metric"));
  if (j.contains("observable")) c.observable = parse_observable(j.at("observable"));
  c.horizon = get_number(j, "horizon", c.horizon);
  c.y_grid = get_doubles(j, "y_grid");
  c.t_grid = get_doubles(j, "t_grid");
  c.tau_grid = get_doubles(j, "tau_grid");
  c.replicas = static_cast<std::int64_t>(get_number(j, "replicas", static_cast<double>(c.replicas)));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      bad("seed must be an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.alpha = get_number(j, "alpha", c.alpha);
  c.tol = get_number(j, "tol", c.tol);
  c.start_state = static_cast<State>(get_number(j, "start_state", 0.0));
  c.scan_limit = static_cast<State>(get_number(j, "scan_limit", static_cast<double>(c.scan_limit)));
  if (j.contains("center")) c.center = j.at("center").get<double>();
  c.bound_form = get_string(j, "bound_form", c.bound_form);
  if (c.bound_form != "direct" && c.bound_form != "floor") bad("bound_form must be direct or floor");
  c.method = get_string(j, "method", c.method);
  if (c.method != "auto" && c.method != "exact" && c.method != "numeric" && c.method != "tensorized")
    bad("method must be auto, exact, numeric, or tensorized");
  if (j.contains("dump_path")) {
    if (!j.at("dump_path").is_boolean()) bad("dump_path must be a boolean");
    c.dump_path = j.at("dump_path").get<bool>();
  }
  c.workers = static_cast<int>(get_number(j, "workers", 1.0));
  if (c.workers < 1) bad("workers must be >= 1");

  for (const char* side : {"mu", "nu"}) {
    if (!j.contains(side)) continue;
    const ordered_json& m = j.at(side);
    check_keys(m, {"support", "weights"}, side);
    auto support = get_states(m, "support");
    auto weights = get_doubles(m, "weights");
    if (support.size() != weights.size()) bad(std::string(side) + " support and weights must align");
    if (std::string(side) == "mu") {
      c.mu_support = std::move(support);
      c.mu_weights = std::move(weights);
    } else {
      c.nu_support = std::move(support);
      c.nu_weights = std::move(weights);
    }
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema"] = 1;
  if (!c.label.empty()) j["label"] = c.label;
  if (!c.model.model.empty()) j["model"] = model_to_json(c.model);
  if (!c.metric.kind.empty()) j["metric"] = metric_to_json(c.metric);
  if (!c.observable.kind.empty()) j["observable"] = observable_to_json(c.observable);
  j["horizon"] = c.horizon;
  if (!c.y_grid.empty()) j["y_grid"] = c.y_grid;
  if (!c.t_grid.empty()) j["t_grid"] = c.t_grid;
  if (!c.tau_grid.empty()) j["tau_grid"] = c.tau_grid;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["alpha"] = c.alpha;
  j["tol"] = c.tol;
  j["start_state"] = c.start_state;
  j["scan_limit"] = c.scan_limit;
  if (c.center) j["center"] = *c.center;
  j["bound_form"] = c.bound_form;
  j["method"] = c.method;
  if (c.dump_path) j["dump_path"] = true;
  j["workers"] = c.workers;
  if (!c.mu_support.empty()) j["mu"] = {{"support", c.mu_support}, {"weights", c.mu_weights}};
  if (!c.nu_support.empty()) j["nu"] = {{"support", c.nu_support}, {"weights", c.nu_weights}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  // Worker count is an execution detail, not experiment identity: reports
  // must hash the same however the replicas are scheduled.
  ordered_json j = to_json(config);
  j.erase("workers");
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

BirthDeathRates make_rates(const ModelConfig& model) {
  if (model.model == "mm_infinity") {
    BirthDeathRates rates = BirthDeathRates::mm_infinity(model.lambda, model.nu);
    if (model.truncation) rates = rates.truncated(*model.truncation);
    return rates;
  }
  if (model.model == "birth_death") {
    const auto birth = std::make_shared<std::vector<double>>(model.birth);
    const auto death = std::make_shared<std::vector<double>>(model.death);
    const State n = static_cast<State>(birth->size());
    return BirthDeathRates::custom(
               [birth, n](State x) {
                 return x < n ? (*birth)[static_cast<std::size_t>(x)] : 0.0;
               },
               [death, n](State x) {
                 return x >= 1 && x <= n ? (*death)[static_cast<std::size_t>(x - 1)] : 0.0;
               })
        .truncated(n);
  }
  bad("model \"" + model.model + "\" has no birth-death form");
}

bool is_birth_death(const ModelConfig& model) {
  return model.model == "mm_infinity" || model.model == "birth_death";
}

Generator make_generator(const ModelConfig& model) {
  if (is_birth_death(model)) return make_rates(model).to_generator();
  if (model.model == "hypercube") return hypercube_generator(model.dimension);
  if (model.model == "product") {
    std::vector<Generator> parts;
    parts.reserve(model.components.size());
    for (const ModelConfig& c : model.components) parts.push_back(make_generator(c));
    return build_product_chain(std::move(parts));
  }
  if (model.model == "explicit") {
    auto table = std::make_shared<std::map<State, std::vector<JumpEntry>>>();
    std::set<State> known(model.states.begin(), model.states.end());
    for (const auto& arc : model.jumps) {
      const State from = static_cast<State>(arc[0]);
      const State to = static_cast<State>(arc[1]);
      if (!known.count(from) || !known.count(to)) bad("explicit jump leaves the state list");
      (*table)[from].push_back({to, arc[2]});
    }
    return Generator(
        [table](State x) {
          const auto it = table->find(x);
          return it == table->end() ? std::vector<JumpEntry>{} : it->second;
        },
        model.states, "explicit");
  }
  bad("unknown model \"" + model.model + "\"");
}

std::shared_ptr<Metric> make_metric(const MetricConfig& metric, const ModelConfig& model) {
  std::shared_ptr<Metric> base;
  if (metric.kind == "classical") {
    base = std::make_shared<PathMetric>(PathMetric::classical());
  } else if (metric.kind == "inv_sqrt") {
    base = std::make_shared<PathMetric>(PathMetric::inverse_sqrt());
  } else if (metric.kind == "trivial") {
    base = std::make_shared<TrivialMetric>();
  } else if (metric.kind == "table") {
    base = std::make_shared<PathMetric>(PathMetric::from_table(
        metric.weights, metric.tail == "constant" ? TailRule::ConstantExtension : TailRule::Error));
  } else {
    bad("metric kind must be set");
  }

  // Product models measure coordinatewise and add the pieces.
  if (model.model == "hypercube") return std::make_shared<ProductMetric>(base, model.dimension, 2);
  if (model.model == "product") {
    const State radix = *model.components.front().truncation + 1;
    return std::make_shared<ProductMetric>(base, static_cast<int>(model.components.size()),
                                           radix);
  }
  return base;
}

Observable make_observable(const ObservableConfig& obs, const ModelConfig& model) {
  const bool product = model.model == "hypercube" || model.model == "product";
  if (obs.kind == "identity") return [](State x) { return static_cast<double>(x); };
  if (obs.kind == "sqrt")
    return [](State x) { return std::sqrt(static_cast<double>(x)); };
  if (obs.kind == "indicator") {
    const double c = obs.threshold;
    return [c](State x) { return static_cast<double>(x) >= c ? 1.0 : 0.0; };
  }
  if (obs.kind == "table") {
    const auto values = std::make_shared<std::vector<double>>(obs.values);
    const bool extend = obs.tail == "constant";
    return [values, extend](State x) {
      if (x < 0) throw TableRangeError("observable table read below zero");
      if (x < static_cast<State>(values->size())) return (*values)[static_cast<std::size_t>(x)];
      if (extend) return values->back();
      throw TableRangeError("observable table read past the end");
    };
  }
  if (obs.kind == "coordinate_sum") {
    if (!product) bad("coordinate_sum needs a product or hypercube model");
    const int dim = model.model == "hypercube" ? model.dimension
                                               : static_cast<int>(model.components.size());
    const State radix = model.model == "hypercube" ? 2 : *model.components.front().truncation + 1;
    return [dim, radix](State x) {
      double total = 0.0;
      for (int i = 0; i < dim; ++i) {
        total += static_cast<double>(x % radix);
        x /= radix;
      }
      return total;
    };
  }
  bad("observable kind must be set");
}

}  // namespace jumpcurve
