#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "jumpcurve/jump_process.hpp"
#include "jumpcurve/metric.hpp"
#include "jumpcurve/types.hpp"

namespace jumpcurve {

// Model descriptor. Which fields apply depends on `model`:
//   mm_infinity: lambda, nu, optional truncation
//   birth_death: birth[] and death[] tables, states {0..n} with n = table size
//   hypercube:   dimension
//   product:     components[] (each a finite model on a shared {0..r-1}), or
//                component + copies
//   explicit:    states[] and jumps[] of [from, to, rate]
struct ModelConfig {
  std::string model;
  double lambda = 0.0;
  double nu = 0.0;
  std::optional<State> truncation;
  int dimension = 0;
  std::vector<double> birth;
  std::vector<double> death;
  std::vector<ModelConfig> components;
  int copies = 0;
  std::vector<State> states;
  std::vector<std::array<double, 3>> jumps;
};

// Per-coordinate ground metric; product models wrap it coordinatewise into
// an l1 sum, so "trivial" on a hypercube is the bit-flip count.
struct MetricConfig {
  std::string kind;  // classical | inv_sqrt | trivial | table
  std::vector<double> weights;
  std::string tail = "error";  // constant | error, tables only
};

struct ObservableConfig {
  std::string kind;  // identity | sqrt | indicator | table | coordinate_sum
  double threshold = 0.0;
  std::vector<double> values;
  std::string tail = "error";  // constant | error, tables only
};

struct ExperimentConfig {
  int schema = 1;
  std::string label;
  ModelConfig model;
  MetricConfig metric;
  ObservableConfig observable;
  double horizon = 10.0;
  std::vector<double> y_grid;
  std::vector<double> t_grid;    // numeric curvature probe times
  std::vector<double> tau_grid;  // empirical transform probe points
  std::int64_t replicas = 100000;
  std::uint64_t seed = 20240815;
  double alpha = 0.01;
  double tol = 1e-9;
  State start_state = 0;
  State scan_limit = 4000;
  std::optional<double> center;      // default: stationary mean of the observable
  std::string bound_form = "direct";  // direct | floor
  std::string method = "auto";        // auto | exact | numeric | tensorized
  bool dump_path = false;
  int workers = 1;
  // Transport subcommand inputs.
  std::vector<State> mu_support;
  std::vector<double> mu_weights;
  std::vector<State> nu_support;
  std::vector<double> nu_weights;
};

// Strict parse: unknown keys, missing required fields, or a schema other
// than 1 are errors. parse_config(to_json(c)) reproduces c exactly.
ExperimentConfig parse_config(const nlohmann::ordered_json& j);
ExperimentConfig load_config_file(const std::string& path);
nlohmann::ordered_json to_json(const ExperimentConfig& config);

// FNV-1a over the canonical serialization, as a fixed-width hex string.
std::string config_hash(const ExperimentConfig& config);

// Instantiation of the descriptors.
BirthDeathRates make_rates(const ModelConfig& model);
Generator make_generator(const ModelConfig& model);
std::shared_ptr<Metric> make_metric(const MetricConfig& metric, const ModelConfig& model);
Observable make_observable(const ObservableConfig& obs, const ModelConfig& model);

// True for the forms the birth-death formula machinery accepts directly.
bool is_birth_death(const ModelConfig& model);

}  // namespace jumpcurve
