#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "conelq/config.hpp"
#include "conelq/run.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> steps;
  std::optional<double> tol;
};

void add_common(CLI::App* sub, CliOptions& opts) {
  sub->add_option("--config", opts.config_path, "Path to the JSON run configuration")
      ->required();
  sub->add_option("--out", opts.out_dir, "Output directory for reports and CSV tables");
  sub->add_option("--seed", opts.seed, "Override the simulation seed");
  sub->add_option("--paths", opts.paths, "Override the Monte Carlo path count");
  sub->add_option("--steps", opts.steps, "Override the number of time steps");
  sub->add_option("--tol", opts.tol, "Override the optimality-check tolerance");
}

std::string load_with_overrides(const CliOptions& opts) {
  std::ifstream in(opts.config_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + opts.config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json root = nlohmann::json::parse(buf.str());
  root["mode"] = opts.mode;
  if (opts.seed) root["sim"]["seed"] = *opts.seed;
  if (opts.paths) root["sim"]["n_paths"] = *opts.paths;
  if (opts.steps) root["problem"]["n_steps"] = *opts.steps;
  if (opts.tol) root["tolerances"]["check"] = *opts.tol;
  return root.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cone-constrained linear-quadratic control toolkit"};
  app.require_subcommand(1);
  CliOptions opts;
  for (const char* name : {"solve", "simulate", "verify", "oracle", "gap"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, opts);
    sub->callback([&opts, name] { opts.mode = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    conelq::RunConfig config = conelq::parse_config(load_with_overrides(opts));
    return conelq::run(config, opts.out_dir);
  } catch (const std::exception& e) {
    nlohmann::ordered_json err{{"error", true}, {"message", e.what()}};
    std::cerr << err.dump() << std::endl;
    return 1;
  }
}
