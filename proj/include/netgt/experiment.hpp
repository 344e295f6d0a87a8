#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "netgt/json_io.hpp"
#include "netgt/statistics.hpp"
#include "netgt/theory.hpp"

namespace netgt {

enum class ExperimentKind { null_calibration, power_grid, phase_curve };
enum class OutputFormat { csv, json };

// Either a named preset with knob overrides, or an explicit parameter document
// (see params_from_json) whose only sweepable knob is n.
struct ScenarioSpec {
  std::string preset;
  Knobs knobs;
  std::optional<json> params;
};

struct GridAxis {
  std::string knob;
  std::vector<double> values;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::power_grid;
  ScenarioSpec scenario;
  std::vector<GridAxis> grid;  // cells are the product, first axis slowest
  std::size_t replications = 1;
  double level = 0.05;
  std::uint64_t seed = 0;
  std::vector<StatisticKind> statistics{StatisticKind::chi2, StatisticKind::osq, StatisticKind::pe};
  bool resample_memberships = true;
  std::optional<std::filesystem::path> output;
  OutputFormat format = OutputFormat::csv;
  unsigned threads = 1;  // 0: hardware concurrency
  bool timing = false;   // off keeps outputs byte-identical across runs
  Normalization normalization = Normalization::finite_sample;

  // Throws ConfigError.
  void validate() const;
};

ExperimentConfig config_from_json(const json& j);
json to_json(const ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct StatisticSummary {
  StatisticKind kind = StatisticKind::pe;
  double power = 0.0;  // rejection fraction
  double mean_norm = 0.0;
  double sd_norm = 0.0;
};

struct CellResult {
  std::vector<std::pair<std::string, double>> coordinates;
  std::vector<StatisticSummary> statistics;
  std::size_t replications = 0;
  std::optional<double> delta_n, tau_n, beta_n;
  std::optional<double> seconds;

  const StatisticSummary& summary(StatisticKind kind) const;
};

// A resolved grid cell: the scenario with the cell's knobs applied.
struct ExperimentCell {
  std::vector<std::pair<std::string, double>> coordinates;
  PresetScenario scenario;
};

std::vector<ExperimentCell> expand_grid(const ExperimentConfig& config);

// Raw per-replication reports for one cell, in replication order. Replication
// r draws from StreamKey{seed}.derive({cell_index, r}).
std::vector<GlobalTests> run_replications(const ExperimentCell& cell, std::size_t cell_index,
                                          const ExperimentConfig& config);

std::vector<CellResult> run_null_calibration(const ExperimentConfig& config);
std::vector<CellResult> run_power_grid(const ExperimentConfig& config);
std::vector<CellResult> run_phase_curve(const ExperimentConfig& config);
// Dispatches on config.kind.
std::vector<CellResult> run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<CellResult>& cells);
json results_to_json(const ExperimentConfig& config, const std::vector<CellResult>& cells);
void write_results(std::ostream& out, const ExperimentConfig& config, const std::vector<CellResult>& cells);

// Pool-adjacent-violators fit of y, nondecreasing in x (equal x share a value).
// Returned in the input order.
std::vector<double> isotonic_regression(std::span<const double> x, std::span<const double> y);

// sup |power - isotonic fit| of one statistic's power against beta_n.
double isotonic_deviation(const std::vector<CellResult>& cells, StatisticKind kind);

// Loads an edge list and runs one of chi2 / osq / pe.
TestReport test_file(const std::filesystem::path& path, StatisticKind statistic, double level,
                     Normalization norm = Normalization::finite_sample);

}  // namespace netgt
