#include "netgt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include "netgt/error.hpp"

namespace netgt {

namespace {

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::null_calibration: return "null_calibration";
    case ExperimentKind::power_grid: return "power_grid";
    case ExperimentKind::phase_curve: return "phase_curve";
  }
  return "";
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "null_calibration") return ExperimentKind::null_calibration;
  if (s == "power_grid") return ExperimentKind::power_grid;
  if (s == "phase_curve") return ExperimentKind::phase_curve;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

std::vector<double> axis_values(const json& j, const std::string& knob) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(number(v, "grid value for " + knob));
  } else if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      if (key != "from" && key != "to" && key != "step")
        throw ConfigError("grid range for " + knob + " has unknown field '" + key + "'");
    const double from = number(j.value("from", json()), knob + ".from");
    const double to = number(j.value("to", json()), knob + ".to");
    const double step = number(j.value("step", json()), knob + ".step");
    if (!(step > 0.0) || to < from) throw ConfigError("grid range for " + knob + " needs step > 0 and to >= from");
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(from + static_cast<double>(i) * step);
  } else {
    throw ConfigError("grid axis " + knob + " must be an array or a {from, to, step} range");
  }
  return out;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

PresetScenario resolve_cell(const ScenarioSpec& spec, const Knobs& coords) {
  try {
    if (!spec.params) {
      Knobs knobs = spec.knobs;
      for (const auto& [k, v] : coords) knobs[k] = v;
      return preset_scenario(spec.preset, knobs);
    }
    json doc = *spec.params;
    if (auto it = coords.find("n"); it != coords.end()) {
      if (it->second != std::floor(it->second) || it->second < 2) throw ConfigError("grid n must be an integer >= 2");
      doc["n"] = static_cast<std::size_t>(it->second);
    }
    PresetScenario s;
    s.name = "custom";
    s.params = params_from_json(doc);
    s.knobs["n"] = static_cast<double>(s.params.n);
    s.theory = theory_report(s.params);
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

const TestReport& pick(const GlobalTests& t, StatisticKind kind) {
  switch (kind) {
    case StatisticKind::chi2: return t.chi2;
    case StatisticKind::osq: return t.osq;
    default: return t.pe;
  }
}

std::vector<CellResult> run_cells(const ExperimentConfig& config) {
  const auto cells = expand_grid(config);
  std::vector<CellResult> out;
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    const auto reports = run_replications(cells[c], c, config);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    CellResult r;
    r.coordinates = cells[c].coordinates;
    r.replications = reports.size();
    const auto& theory = cells[c].scenario.theory;
    r.delta_n = theory.delta_n;
    r.tau_n = theory.tau_n;
    r.beta_n = theory.beta_n;
    if (config.timing) r.seconds = elapsed;
    const double reps = static_cast<double>(reports.size());
    for (StatisticKind kind : config.statistics) {
      StatisticSummary s;
      s.kind = kind;
      double rejects = 0.0, sum = 0.0;
      for (const auto& t : reports) {
        const auto& rep = pick(t, kind);
        rejects += rep.reject ? 1.0 : 0.0;
        sum += rep.normalized;
      }
      s.power = rejects / reps;
      s.mean_norm = sum / reps;
      double ss = 0.0;
      for (const auto& t : reports) ss += std::pow(pick(t, kind).normalized - s.mean_norm, 2);
      s.sd_norm = reports.size() > 1 ? std::sqrt(ss / (reps - 1.0)) : 0.0;
      r.statistics.push_back(s);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (grid.empty()) throw ConfigError("grid must name at least one knob");
  std::set<std::string> seen;
  for (const auto& axis : grid) {
    if (axis.values.empty()) throw ConfigError("grid axis " + axis.knob + " has no values");
    if (!seen.insert(axis.knob).second) throw ConfigError("grid axis " + axis.knob + " appears twice");
  }
  if (statistics.empty()) throw ConfigError("statistics must be nonempty");
  std::set<StatisticKind> stats;
  for (auto s : statistics) {
    if (s != StatisticKind::chi2 && s != StatisticKind::osq && s != StatisticKind::pe)
      throw ConfigError("statistics must be a subset of {chi2, osq, pe}");
    if (!stats.insert(s).second) throw ConfigError("statistic " + to_string(s) + " listed twice");
  }
  if (kind == ExperimentKind::phase_curve && grid.size() != 1)
    throw ConfigError("a phase curve sweeps exactly one knob");
  if (scenario.params) {
    for (const auto& axis : grid)
      if (axis.knob != "n") throw ConfigError("grid knob '" + axis.knob + "' unknown to explicit parameters");
  } else {
    std::vector<std::string> known;
    try {
      known = preset_knobs(scenario.preset);
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    auto check = [&](const std::string& k) {
      if (std::find(known.begin(), known.end(), k) == known.end())
        throw ConfigError("knob '" + k + "' unknown to scenario " + scenario.preset);
    };
    for (const auto& axis : grid) check(axis.knob);
    for (const auto& [k, v] : scenario.knobs) check(k);
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> fields = {"kind",      "scenario", "grid",  "replications",
                                               "level",     "seed",     "statistics",
                                               "resample_memberships",  "output", "threads", "timing",
                                               "normalization"};
  for (const auto& [key, value] : j.items())
    if (!fields.contains(key)) throw ConfigError("unknown config field '" + key + "'");

  ExperimentConfig c;
  try {
    if (j.contains("kind")) c.kind = parse_kind(j.at("kind").get<std::string>());
    if (!j.contains("scenario")) throw ConfigError("missing field 'scenario'");
    const json& s = j.at("scenario");
    if (s.is_string()) {
      c.scenario.preset = s.get<std::string>();
    } else if (s.is_object() && s.contains("params")) {
      if (s.size() != 1) throw ConfigError("explicit scenario takes only 'params'");
      c.scenario.params = s.at("params");
      params_from_json(*c.scenario.params);  // fail early
    } else if (s.is_object() && s.contains("preset")) {
      c.scenario.preset = s.at("preset").get<std::string>();
      for (const auto& [key, value] : s.items()) {
        if (key == "preset") continue;
        if (key != "knobs") throw ConfigError("scenario has unknown field '" + key + "'");
        for (const auto& [k, v] : value.items()) c.scenario.knobs[k] = number(v, "knob " + k);
      }
    } else {
      throw ConfigError("scenario must be a preset name, {preset, knobs} or {params}");
    }
    if (!j.contains("grid") || !j.at("grid").is_object()) throw ConfigError("grid must be an object of knob sweeps");
    for (const auto& [knob, values] : j.at("grid").items()) c.grid.push_back({knob, axis_values(values, knob)});
    if (j.contains("replications")) {
      const auto& r = j.at("replications");
      if (!r.is_number_integer() || r.get<long long>() < 1) throw ConfigError("replications must be an integer >= 1");
      c.replications = r.get<std::size_t>();
    }
    if (j.contains("level")) c.level = number(j.at("level"), "level");
    if (j.contains("seed")) {
      const auto& sd = j.at("seed");
      if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<long long>() >= 0))
        throw ConfigError("seed must be a nonnegative integer");
      c.seed = sd.get<std::uint64_t>();
    }
    if (j.contains("statistics")) {
      c.statistics.clear();
      for (const auto& name : j.at("statistics")) c.statistics.push_back(parse_statistic(name.get<std::string>()));
    } else if (c.kind == ExperimentKind::phase_curve) {
      c.statistics = {StatisticKind::pe};
    }
    if (j.contains("resample_memberships")) c.resample_memberships = j.at("resample_memberships").get<bool>();
    if (j.contains("output")) {
      const auto& o = j.at("output");
      if (o.is_string()) {
        c.output = o.get<std::string>();
      } else if (o.is_object()) {
        for (const auto& [key, value] : o.items()) {
          if (key == "path") {
            c.output = value.get<std::string>();
          } else if (key == "format") {
            const auto f = value.get<std::string>();
            if (f == "csv") c.format = OutputFormat::csv;
            else if (f == "json") c.format = OutputFormat::json;
            else throw ConfigError("output format must be csv or json");
          } else {
            throw ConfigError("output has unknown field '" + key + "'");
          }
        }
      } else {
        throw ConfigError("output must be a path or {path, format}");
      }
    }
    if (j.contains("threads")) {
      const auto& t = j.at("threads");
      if (!t.is_number_integer() || t.get<long long>() < 0) throw ConfigError("threads must be an integer >= 0");
      c.threads = t.get<unsigned>();
    }
    if (j.contains("timing")) c.timing = j.at("timing").get<bool>();
    if (j.contains("normalization")) c.normalization = parse_normalization(j.at("normalization").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = kind_name(c.kind);
  if (c.scenario.params) {
    j["scenario"] = {{"params", *c.scenario.params}};
  } else {
    json knobs = json::object();
    for (const auto& [k, v] : c.scenario.knobs) knobs[k] = v;
    j["scenario"] = {{"preset", c.scenario.preset}, {"knobs", knobs}};
  }
  json grid = json::object();
  for (const auto& axis : c.grid) grid[axis.knob] = axis.values;
  j["grid"] = grid;
  j["replications"] = c.replications;
  j["level"] = c.level;
  j["seed"] = c.seed;
  json stats = json::array();
  for (auto s : c.statistics) stats.push_back(to_string(s));
  j["statistics"] = stats;
  j["resample_memberships"] = c.resample_memberships;
  json output = {{"format", c.format == OutputFormat::csv ? "csv" : "json"}};
  if (c.output) output["path"] = c.output->string();
  j["output"] = output;
  j["threads"] = c.threads;
  j["timing"] = c.timing;
  j["normalization"] = to_string(c.normalization);
  return j;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

const StatisticSummary& CellResult::summary(StatisticKind kind) const {
  for (const auto& s : statistics)
    if (s.kind == kind) return s;
  throw ParameterError("statistic " + to_string(kind) + " was not run");
}

std::vector<ExperimentCell> expand_grid(const ExperimentConfig& config) {
  config.validate();
  std::vector<ExperimentCell> cells;
  std::vector<std::size_t> idx(config.grid.size(), 0);
  for (;;) {
    ExperimentCell cell;
    Knobs coords;
    for (std::size_t a = 0; a < config.grid.size(); ++a) {
      const double v = config.grid[a].values[idx[a]];
      cell.coordinates.emplace_back(config.grid[a].knob, v);
      coords[config.grid[a].knob] = v;
    }
    cell.scenario = resolve_cell(config.scenario, coords);
    if (config.kind == ExperimentKind::null_calibration && cell.scenario.params.K != 1)
      throw ConfigError("null calibration needs a K = 1 scenario");
    cells.push_back(std::move(cell));

    std::size_t a = config.grid.size();
    while (a > 0) {
      --a;
      if (++idx[a] < config.grid[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return cells;
    }
  }
}

std::vector<GlobalTests> run_replications(const ExperimentCell& cell, std::size_t cell_index,
                                          const ExperimentConfig& config) {
  const std::size_t reps = config.replications;
  const StreamKey cell_key = StreamKey{config.seed}.derive(cell_index);
  std::optional<Matrix> shared_pi;
  if (!config.resample_memberships)
    shared_pi = realize_memberships(cell.scenario.params, purpose_key(cell_key, StreamPurpose::memberships));

  std::vector<GlobalTests> results(reps);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&](std::exception_ptr& slot) {
    try {
      for (std::size_t r; !failed && (r = next.fetch_add(1)) < reps;) {
        const StreamKey key = cell_key.derive(r);
        const MmsbmParams params = cell.scenario.draw_params(key);
        const Matrix pi = shared_pi ? *shared_pi
                                    : realize_memberships(params, purpose_key(key, StreamPurpose::memberships));
        const auto a = sample_network(pi, params.P, purpose_key(key, StreamPurpose::edges));
        results[r] = global_tests(a, config.level, config.normalization);
      }
    } catch (...) {
      slot = std::current_exception();
      failed = true;
    }
  };

  unsigned threads = config.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
  if (threads <= 1) {
    worker(failure);
  } else {
    std::vector<std::exception_ptr> slots(threads);
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&, t] { worker(slots[t]); });
    pool.clear();
    for (auto& s : slots)
      if (s && !failure) failure = s;
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<CellResult> run_null_calibration(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::null_calibration) {
    ExperimentConfig c = config;
    c.kind = ExperimentKind::null_calibration;
    return run_cells(c);
  }
  return run_cells(config);
}

std::vector<CellResult> run_power_grid(const ExperimentConfig& config) { return run_cells(config); }

std::vector<CellResult> run_phase_curve(const ExperimentConfig& config) {
  if (config.grid.size() != 1) throw ConfigError("a phase curve sweeps exactly one knob");
  return run_cells(config);
}

std::vector<CellResult> run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::null_calibration: return run_null_calibration(config);
    case ExperimentKind::phase_curve: return run_phase_curve(config);
    default: return run_power_grid(config);
  }
}

void write_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  for (const auto& axis : config.grid) out << axis.knob << ',';
  out << "statistic,power,mean_norm,sd_norm,reps,delta_n,tau_n,beta_n,seconds\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& cell : cells) {
    for (const auto& s : cell.statistics) {
      for (const auto& [k, v] : cell.coordinates) out << format_number(v) << ',';
      out << to_string(s.kind) << ',' << format_number(s.power) << ',' << format_number(s.mean_norm) << ','
          << format_number(s.sd_norm) << ',' << cell.replications << ',' << opt(cell.delta_n) << ','
          << opt(cell.tau_n) << ',' << opt(cell.beta_n) << ',' << opt(cell.seconds) << '\n';
    }
  }
}

json results_to_json(const ExperimentConfig&, const std::vector<CellResult>& cells) {
  json rows = json::array();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  for (const auto& cell : cells) {
    for (const auto& s : cell.statistics) {
      json row;
      for (const auto& [k, v] : cell.coordinates) row[k] = v;
      row["statistic"] = to_string(s.kind);
      row["power"] = s.power;
      row["mean_norm"] = s.mean_norm;
      row["sd_norm"] = s.sd_norm;
      row["reps"] = cell.replications;
      row["delta_n"] = opt(cell.delta_n);
      row["tau_n"] = opt(cell.tau_n);
      row["beta_n"] = opt(cell.beta_n);
      row["seconds"] = opt(cell.seconds);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_results(std::ostream& out, const ExperimentConfig& config, const std::vector<CellResult>& cells) {
  if (config.format == OutputFormat::json) out << results_to_json(config, cells).dump(2) << '\n';
  else write_csv(out, config, cells);
}

std::vector<double> isotonic_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("isotonic regression needs equal-length inputs");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  struct Block {
    double sum;
    double weight;
    std::size_t first, last;  // positions in `order`
  };
  std::vector<Block> blocks;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t i = order[p];
    if (!blocks.empty() && x[order[blocks.back().last]] == x[i]) {
      blocks.back().sum += y[i];
      blocks.back().weight += 1.0;
      blocks.back().last = p;
    } else {
      blocks.push_back({y[i], 1.0, p, p});
    }
    while (blocks.size() > 1) {
      const Block& hi = blocks.back();
      const Block& lo = blocks[blocks.size() - 2];
      if (lo.sum / lo.weight <= hi.sum / hi.weight) break;
      Block merged{lo.sum + hi.sum, lo.weight + hi.weight, lo.first, hi.last};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> fit(n);
  for (const auto& b : blocks)
    for (std::size_t p = b.first; p <= b.last; ++p) fit[order[p]] = b.sum / b.weight;
  return fit;
}

double isotonic_deviation(const std::vector<CellResult>& cells, StatisticKind kind) {
  std::vector<double> beta, power;
  for (const auto& c : cells) {
    if (!c.beta_n) throw ParameterError("cell has no beta_n");
    beta.push_back(*c.beta_n);
    power.push_back(c.summary(kind).power);
  }
  const auto fit = isotonic_regression(beta, power);
  double dev = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) dev = std::max(dev, std::abs(fit[i] - power[i]));
  return dev;
}

TestReport test_file(const std::filesystem::path& path, StatisticKind statistic, double level, Normalization norm) {
  const auto a = read_edge_list(path);
  switch (statistic) {
    case StatisticKind::chi2: return chi2_statistic(a, level, norm);
    case StatisticKind::osq: return osq_statistic(a, level, norm);
    case StatisticKind::pe: return pe_statistic(a, level, norm);
    default: throw ParameterError("test supports chi2, osq and pe");
  }
}

}  // namespace netgt
