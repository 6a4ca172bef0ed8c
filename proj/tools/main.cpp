#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "jumpcurve/config.hpp"
#include "jumpcurve/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> replicas;
  std::optional<std::string> out_dir;
  std::string format = "json";
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein curvature and deviation bounds for Markov jump processes"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "JSON experiment config")->required();
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--replicas", args.replicas, "override the config replica count");
    sub->add_option("--out", args.out_dir, "directory for report.json and CSV outputs");
    sub->add_option("--format", args.format, "stdout payload: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* curvature = app.add_subcommand("curvature", "curvature certificate for a model");
  CLI::App* bound = app.add_subcommand("bound", "deviation bound curve over a y grid");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates and path dumps");
  CLI::App* verify = app.add_subcommand("verify", "bound curve against Monte Carlo upper limits");
  CLI::App* transport = app.add_subcommand("transport", "distance, plan, and dual certificate");
  for (CLI::App* sub : {curvature, bound, simulate, verify, transport}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  jumpcurve::ExperimentConfig config;
  try {
    config = jumpcurve::load_config_file(args.config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (args.seed) config.seed = *args.seed;
  if (args.replicas) config.replicas = *args.replicas;

  jumpcurve::RunOptions opts;
  opts.out_dir = args.out_dir;
  opts.format = args.format;

  if (curvature->parsed()) return jumpcurve::run_curvature(config, opts, std::cout);
  if (bound->parsed()) return jumpcurve::run_bound(config, opts, std::cout);
  if (simulate->parsed()) return jumpcurve::run_simulate(config, opts, std::cout);
  if (verify->parsed()) return jumpcurve::run_verify(config, opts, std::cout);
  if (transport->parsed()) return jumpcurve::run_transport(config, opts, std::cout);
  return 1;
}
