// netgt: global tests for community structure in networks.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netgt/error.hpp"
#include "netgt/experiment.hpp"
#include "netgt/identifiability.hpp"
#include "netgt/json_io.hpp"
#include "netgt/model.hpp"
#include "netgt/theory.hpp"

using namespace netgt;

namespace {

constexpr int kExitReject = 3;
constexpr int kExitError = 2;

struct ScenarioOptions {
  std::string preset;
  std::vector<std::string> knobs;  // key=value
  std::string params_file;

  void add_to(CLI::App* app) {
    app->add_option("--preset", preset, "Scenario preset name");
    app->add_option("--knob", knobs, "Preset knob override, key=value (repeatable)");
    app->add_option("--params", params_file, "JSON file with explicit MMSBM parameters");
  }

  bool given() const { return !preset.empty() || !params_file.empty(); }

  PresetScenario resolve() const {
    if (!preset.empty() && !params_file.empty()) throw ConfigError("give either --preset or --params");
    if (!params_file.empty()) {
      if (!knobs.empty()) throw ConfigError("--knob applies to presets only");
      std::ifstream in(params_file);
      if (!in) throw ConfigError("cannot open " + params_file);
      PresetScenario s;
      s.name = "custom";
      try {
        s.params = params_from_json(json::parse(in));
      } catch (const json::parse_error& e) {
        throw ConfigError(params_file + ": " + e.what());
      }
      s.theory = theory_report(s.params);
      return s;
    }
    Knobs k;
    for (const auto& kv : knobs) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("knob '" + kv + "' is not key=value");
      try {
        k[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("knob '" + kv + "' has a non-numeric value");
      }
    }
    return preset_scenario(preset, k);
  }
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global tests for community structure in networks"};
  app.require_subcommand(1);

  // test
  auto* test = app.add_subcommand("test", "Run a global test on an edge-list file");
  std::string test_path, test_stat = "pe";
  double level = 0.05;
  test->add_option("file", test_path, "Edge-list file")->required();
  test->add_option("-s,--statistic", test_stat, "chi2, osq or pe")->check(CLI::IsMember({"chi2", "osq", "pe"}));
  test->add_option("--level", level, "Test level in (0, 1)");
  std::string normalization = "finite_sample";
  test->add_option("--normalization", normalization, "finite_sample or asymptotic")
      ->check(CLI::IsMember({"finite_sample", "asymptotic"}));

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Emit an edge list sampled from a scenario");
  ScenarioOptions sim_scenario;
  sim_scenario.add_to(simulate);
  std::uint64_t seed = 0;
  std::string output;
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--output", output, "Output path (default: standard output)");

  // snr
  auto* snr = app.add_subcommand("snr", "Theoretical signal-to-noise ratios");
  ScenarioOptions snr_scenario;
  snr_scenario.add_to(snr);
  std::string snr_p, snr_h, snr_g;
  std::size_t snr_n = 0;
  bool exact = false;
  snr->add_option("--P", snr_p, "Dense K x K community matrix file");
  snr->add_option("--mean", snr_h, "Comma-separated membership mean");
  snr->add_option("--n", snr_n, "Number of nodes");
  snr->add_option("--G", snr_g, "Dense K x K second-moment matrix file");
  snr->add_flag("--exact", exact, "Also compute finite-n ratios on a realized Omega");
  snr->add_option("--seed", seed, "Seed for realizing memberships with --exact");

  // inc
  auto* inc = app.add_subcommand("inc", "Intrinsic number of communities of Omega");
  ScenarioOptions inc_scenario;
  inc_scenario.add_to(inc);
  std::string inc_matrix;
  std::optional<double> rank_tol;
  double hull_tol = 1e-8;
  inc->add_option("--matrix", inc_matrix, "Dense n x n Omega file");
  inc->add_option("--rank-tol", rank_tol, "Eigenvalue cutoff (default 1e-8 ||Omega||)");
  inc->add_option("--hull-tol", hull_tol, "Vertex distance cutoff");
  inc->add_option("--seed", seed, "Seed for realizing memberships of a scenario");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment config");
  std::string config_path, format;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> exp_seed;
  std::optional<double> exp_level;
  experiment->add_option("config", config_path, "JSON experiment config")->required();
  experiment->add_option("--threads", threads, "Worker threads (0: all cores)");
  experiment->add_option("--seed", exp_seed, "Override the config seed");
  experiment->add_option("--level", exp_level, "Override the config level");
  experiment->add_option("--output", output, "Output path (overrides the config; '-' for standard output)");
  experiment->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*test) {
      const auto report = test_file(test_path, parse_statistic(test_stat), level, parse_normalization(normalization));
      std::cout << to_json(report).dump(2) << '\n';
      return report.reject ? kExitReject : 0;
    }

    if (*simulate) {
      if (!sim_scenario.given()) throw ConfigError("simulate needs --preset or --params");
      const auto s = sim_scenario.resolve();
      const auto a = generate_network(s.draw_params(StreamKey{seed}), seed);
      if (output.empty()) {
        write_edge_list(std::cout, a);
      } else {
        std::ofstream out(output);
        if (!out) throw ConfigError("cannot write " + output);
        write_edge_list(out, a);
      }
      return 0;
    }

    if (*snr) {
      json out;
      if (snr_scenario.given()) {
        const auto s = snr_scenario.resolve();
        out["theory"] = to_json(s.theory);
        if (exact) {
          const auto pi = realize_memberships(s.params, purpose_key(StreamKey{seed}, StreamPurpose::memberships));
          out["exact"] = to_json(exact_snr(omega_matrix(s.params, pi)));
        }
      } else {
        if (snr_p.empty() || snr_h.empty() || snr_n == 0) throw ConfigError("snr needs --preset, --params or --P/--mean/--n");
        if (exact) throw ConfigError("--exact needs a scenario (--preset or --params)");
        std::optional<Matrix> g;
        if (!snr_g.empty()) g = read_dense_matrix(std::filesystem::path(snr_g));
        const auto h = parse_list(snr_h);
        out["theory"] = to_json(theory_report(read_dense_matrix(std::filesystem::path(snr_p)), h, snr_n, g));
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (*inc) {
      std::optional<ProbabilityMatrix> omega;
      if (!inc_matrix.empty()) {
        if (inc_scenario.given()) throw ConfigError("give either --matrix or a scenario");
        omega.emplace(read_dense_matrix(std::filesystem::path(inc_matrix)));
      } else if (inc_scenario.given()) {
        const auto s = inc_scenario.resolve();
        const auto pi = realize_memberships(s.params, purpose_key(StreamKey{seed}, StreamPurpose::memberships));
        omega.emplace(omega_matrix(s.params, pi));
      } else {
        throw ConfigError("inc needs --matrix, --preset or --params");
      }
      std::cout << to_json(intrinsic_num_communities(*omega, rank_tol, hull_tol)).dump(2) << '\n';
      return 0;
    }

    if (*experiment) {
      auto config = load_experiment_config(config_path);
      if (threads) config.threads = *threads;
      if (exp_seed) config.seed = *exp_seed;
      if (exp_level) config.level = *exp_level;
      if (!format.empty()) config.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
      if (output == "-") config.output.reset();
      else if (!output.empty()) config.output = output;
      config.validate();

      std::cerr << "running " << config_path << " (" << config.replications << " replications per cell)\n";
      const auto cells = run_experiment(config);
      if (config.output) {
        std::ofstream out(*config.output);
        if (!out) throw ConfigError("cannot write " + config.output->string());
        write_results(out, config, cells);
        std::cerr << "wrote " << cells.size() << " cells to " << config.output->string() << '\n';
      } else {
        write_results(std::cout, config, cells);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
