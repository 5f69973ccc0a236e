#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ucl/commands.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ucl::config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ucl::ExperimentConfig load_config(const std::optional<std::string>& config_path,
                                  const std::optional<std::string>& preset_name) {
  ucl::ExperimentConfig cfg;
  if (config_path) cfg = ucl::parse_config(read_file(*config_path));
  if (preset_name) {
    const auto preset = ucl::preset_from_name(*preset_name);
    if (!preset)
      throw ucl::config_error(
          "unknown preset: " + *preset_name +
          " (expected well-informed, ill-informed or uninformative)");
    ucl::apply_preset(cfg, *preset);
  }
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian bandit simulator with credible-limit policies"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::string> preset_name;
  std::string out_path;
  std::optional<std::string> plot_path;
  int threads = 0;
  int grid_points = 10000;
  long samples = 1000000;

  auto add_config_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--preset", preset_name,
                    "prior scenario: well-informed, ill-informed or "
                    "uninformative (overrides the config's prior block)");
  };

  CLI::App* simulate =
      app.add_subcommand("simulate", "run an ensemble and write the regret CSV");
  add_config_flags(simulate);
  simulate->add_option("--out", out_path, "output CSV path")->required();
  simulate->add_option("--plot", plot_path, "optional SVG chart path");
  simulate->add_option("--threads", threads,
                       "worker threads (default: hardware concurrency)");

  CLI::App* bounds = app.add_subcommand(
      "bounds", "evaluate the expected-selection bounds and write the CSV");
  add_config_flags(bounds);
  bounds->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* verify = app.add_subcommand(
      "verify", "run the ensemble and compare selection counts to the bounds");
  add_config_flags(verify);
  verify->add_option("--out", out_path, "output CSV path")->required();
  verify->add_option("--threads", threads,
                     "worker threads (default: hardware concurrency)");

  CLI::App* check =
      app.add_subcommand("check", "run the numeric inequality sweeps");
  check->add_option("--grid-points", grid_points,
                    "points per inequality sweep");
  check->add_option("--samples", samples,
                    "random tuples for the difference-of-squares sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e); // prints the usage message
    return 1;    // command-line mistakes are config errors
  }

  try {
    if (simulate->parsed()) {
      const auto cfg = load_config(config_path, preset_name);
      return ucl::run_simulate(cfg, out_path, plot_path, threads);
    }
    if (bounds->parsed()) {
      const auto cfg = load_config(config_path, preset_name);
      return ucl::run_bounds(cfg, out_path);
    }
    if (verify->parsed()) {
      const auto cfg = load_config(config_path, preset_name);
      return ucl::run_verify(cfg, out_path, threads);
    }
    if (check->parsed()) {
      if (grid_points < 2) throw ucl::config_error("--grid-points must be >= 2");
      if (samples < 1) throw ucl::config_error("--samples must be >= 1");
      return ucl::run_check(grid_points, samples);
    }
  } catch (const ucl::config_error& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
