#include "resdet/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "resdet/attacks.hpp"
#include "resdet/csv.hpp"
#include "resdet/errors.hpp"
#include "resdet/reactor.hpp"
#include "resdet/scenario_io.hpp"

namespace resdet {

using nlohmann::json;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::uint64_t env_seed() {
  const char* raw = std::getenv("RS_SEED");
  if (raw == nullptr || *raw == '\0') return 1;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("RS_SEED must be a nonnegative integer, got '") + raw + "'");
  }
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
}

std::vector<double> parse_rates(const std::string& list) {
  std::vector<double> rates;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("bad false alarm rate '" + item + "'");
    }
    if (used != item.size()) throw UsageError("bad false alarm rate '" + item + "'");
    if (!(v > 0.0 && v < 1.0)) throw UsageError("false alarm rate must lie in (0, 1), got " + item);
    rates.push_back(v);
  }
  if (rates.empty()) throw UsageError("--far needs at least one rate");
  return rates;
}

json detector_params(const DetectorConfig& cfg) {
  json params = json::object();
  if (cfg.kind == DetectorKind::windowed) params["window"] = cfg.window;
  if (cfg.kind == DetectorKind::cusum) params["b"] = cfg.bias;
  return params;
}

// tune ----------------------------------------------------------------------

struct TuneArgs {
  std::string detector;
  int sensors = 0;
  int window = 1;
  double far = 0.0;
  double bias = 3.0;
  std::string scenario;
  long mc = 1000000;
  std::optional<std::uint64_t> seed;
};

int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream& err) {
  const DetectorKind kind = parse_detector_kind(a.detector);
  if (a.window < 1) throw UsageError("window must be >= 1");
  if (!(a.far > 0.0 && a.far < 1.0)) throw UsageError("false alarm rate must lie in (0, 1)");

  json doc;
  doc["detector"] = std::string(to_string(kind));
  doc["far"] = a.far;
  json params = json::object();

  if (kind == DetectorKind::cusum) {
    if (a.scenario.empty()) throw UsageError("cusum tuning needs --scenario (Monte-Carlo over a model)");
    if (a.mc < 100000) throw UsageError("--mc must be >= 100000");
    const LoadedScenario loaded = load_scenario_file(a.scenario, env_seed(), a.seed);
    const ClosedLoopModel& model = *loaded.scenario.model;
    const int p = static_cast<int>(model.plant().sensors());
    if (a.sensors != 0 && a.sensors != p) {
      throw UsageError("--sensors disagrees with the scenario model");
    }
    const std::uint64_t seed = loaded.scenario.seed;
    const CusumTuning t = tune_cusum_tau(model, a.bias, a.far, static_cast<std::size_t>(a.mc),
                                         substream_seed(seed, 0xC05));
    params = {{"sensors", p}, {"b", a.bias}, {"mc", a.mc}, {"seed", seed}};
    doc["threshold"] = t.tau;
    doc["achieved_rate"] = t.achieved_rate;
    doc["attainable"] = t.attainable;
    doc["diagnostics"] = t.diagnostics;
    for (const auto& d : t.diagnostics) err << "warning: " << d << '\n';
  } else {
    if (a.sensors < 1) throw UsageError("--sensors must be >= 1");
    params["sensors"] = a.sensors;
    if (kind == DetectorKind::windowed) {
      params["window"] = a.window;
      doc["threshold"] = tune_windowed(a.sensors, a.window, a.far);
    } else {
      doc["threshold"] = tune_chi2(a.sensors, a.far);
    }
  }
  doc["params"] = params;
  out << doc.dump() << '\n';
  return 0;
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::string summary;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const LoadedScenario loaded = load_scenario_file(a.scenario, env_seed(), a.seed);
  const Scenario& s = loaded.scenario;
  for (const auto& note : loaded.adjustments) err << "note: " << note << '\n';

  const bool attacked = s.attack && s.attack->kind != AttackKind::none;
  std::vector<SimulationTrace> traces;
  if (attacked) {
    traces = run_ensemble(s);
  } else {
    traces.push_back(run(s, 0));
  }
  {
    std::ofstream csv = open_output(a.out);
    write_trace_csv(csv, traces.front());
  }

  json summary;
  summary["alarms"] = traces.front().alarms.size();
  summary["steps"] = s.steps;
  summary["seed"] = s.seed;
  summary["detector"] = std::string(to_string(s.detector.kind));
  summary["threshold"] = s.detector.threshold;
  summary["attack"] = attacked ? std::string(to_string(s.attack->kind)) : std::string("none");
  if (attacked) {
    const SteadyDeviation dev = measure_steady_deviation(traces);
    std::size_t steady = 0;
    for (const auto& t : traces) steady += t.alarms_steady_phase;
    summary["measured_deviation"] = dev.measured;
    summary["predicted_gamma"] = dev.predicted;
    summary["relative_error"] = dev.relative_error;
    summary["mc_runs"] = traces.size();
    summary["alarms_steady_phase"] = steady;
  } else {
    summary["measured_deviation"] = nullptr;
    summary["predicted_gamma"] = nullptr;
    summary["relative_error"] = nullptr;
    summary["mc_runs"] = 1;
    summary["alarms_steady_phase"] = 0;
  }
  summary["adjustments"] = loaded.adjustments;
  if (a.summary.empty()) {
    out << summary.dump() << '\n';
  } else {
    write_json_file(a.summary, summary);
  }
  return 0;
}

// sweep ---------------------------------------------------------------------

struct SweepArgs {
  int sensors = 1;
  std::string far;
  int ell_max = 10000;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  if (a.sensors < 1) throw UsageError("--sensors must be >= 1");
  if (a.ell_max < 1) throw UsageError("--ell-max must be >= 1");
  const auto rows = sweep_window_contours(a.sensors, parse_rates(a.far), a.ell_max);
  std::ofstream csv = open_output(a.out);
  write_contours_csv(csv, rows);
  return 0;
}

// reactor -------------------------------------------------------------------

struct ReactorArgs {
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int runs = 200;
  long mc = 1000000;
};

json case_json(const reactor::BenchmarkCase& c, const std::string& file) {
  return {{"name", c.name},
          {"detector", std::string(to_string(c.detector.kind))},
          {"threshold", c.detector.threshold},
          {"params", detector_params(c.detector)},
          {"direction", c.direction},
          {"predicted_gamma", c.deviation.predicted},
          {"measured_deviation", c.deviation.measured},
          {"relative_error", c.deviation.relative_error},
          {"alarms_after_attack", c.alarms_after_attack},
          {"alarms_steady_phase", c.alarms_steady_phase},
          {"trace", file}};
}

int cmd_reactor(const ReactorArgs& a, std::ostream& out) {
  if (a.runs < 1) throw UsageError("--runs must be >= 1");
  if (a.mc < 100000) throw UsageError("--mc must be >= 100000");
  namespace fs = std::filesystem;
  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create directory " + a.out_dir);

  reactor::BenchmarkOptions opts;
  opts.seed = a.seed ? *a.seed : env_seed();
  opts.runs = a.runs;
  opts.tau_samples = static_cast<std::size_t>(a.mc);
  const reactor::BenchmarkResult r = reactor::run_benchmark(opts);

  json cases = json::array();
  for (const auto& c : r.cases) {
    const std::string file = c.name + ".csv";
    std::ofstream csv = open_output((dir / file).string());
    write_trace_csv(csv, c.sample_trace, 20);
    cases.push_back(case_json(c, file));
  }

  json ratios = json::object();
  for (const char* name : {"chi2", "windowed4", "windowed50", "cusum"}) {
    const std::string n(name);
    ratios[n] = r.find(n + "_worst").deviation.measured / r.find(n + "_ones").deviation.measured;
  }
  const double damage_ratio =
      r.find("chi2_worst").deviation.measured / r.find("chi2_ones").deviation.measured;
  const Vector unit_ones = Vector::Ones(r.M.cols()).normalized();
  const double normalized_ratio = (r.M * r.worst.direction).norm() / (r.M * unit_ones).norm();

  json report;
  report["seed"] = opts.seed;
  report["runs"] = opts.runs;
  report["steps"] = opts.steps;
  report["burn_in"] = opts.burn_in;
  report["far"] = opts.false_alarm_rate;
  report["thresholds"] = {{"alpha", r.alpha},
                          {"beta_4", r.beta4},
                          {"beta_50", r.beta50},
                          {"b", opts.cusum_bias},
                          {"tau", r.cusum.tau},
                          {"tau_achieved_rate", r.cusum.achieved_rate},
                          {"tau_attainable", r.cusum.attainable},
                          {"tau_samples", r.cusum.samples},
                          {"tau_diagnostics", r.cusum.diagnostics}};
  report["worst_direction"] = vector_json(r.worst.direction);
  report["lambda_max"] = r.worst.lambda;
  report["M"] = matrix_to_json(r.M);
  report["cases"] = cases;
  report["worst_over_ones"] = ratios;
  report["damage_ratio"] = damage_ratio;
  report["normalized_direction_ratio"] = normalized_ratio;
  report["adjustments"] = json::array({reactor::r1_adjustment()});
  write_json_file((dir / "report.json").string(), report);

  out << "thresholds: alpha=" << format_number(r.alpha) << " beta4=" << format_number(r.beta4)
      << " beta50=" << format_number(r.beta50) << " tau=" << format_number(r.cusum.tau)
      << " (b=" << format_number(opts.cusum_bias) << ")\n";
  for (const auto& c : r.cases) {
    out << c.name << ": measured=" << format_number(c.deviation.measured)
        << " predicted=" << format_number(c.deviation.predicted) << '\n';
  }
  out << "damage ratio (chi2 worst / ones): " << format_number(damage_ratio) << '\n';
  return 0;
}

// arl -----------------------------------------------------------------------

struct ArlArgs {
  std::string scenario;
  long runs = 1000;
  std::optional<std::uint64_t> seed;
  long cap = 1000000;
};

int cmd_arl(const ArlArgs& a, std::ostream& out, std::ostream& err) {
  if (a.runs < 1) throw UsageError("--runs must be >= 1");
  if (a.cap < 1) throw UsageError("--cap must be >= 1");
  const LoadedScenario loaded = load_scenario_file(a.scenario, env_seed(), a.seed);
  const Scenario& s = loaded.scenario;
  const ArlEstimate est = estimate_arl(*s.model, s.detector, static_cast<std::size_t>(a.runs),
                                       s.seed, static_cast<std::size_t>(a.cap));
  for (const auto& w : est.warnings) err << "warning: " << w << '\n';
  json doc = {{"detector", std::string(to_string(s.detector.kind))},
              {"threshold", s.detector.threshold},
              {"params", detector_params(s.detector)},
              {"arl", est.arl},
              {"alarm_rate", est.alarm_rate},
              {"half_width", est.half_width},
              {"per_step_rate", est.per_step_rate},
              {"runs", est.runs},
              {"censored_runs", est.censored_runs},
              {"seed", s.seed},
              {"warnings", est.warnings}};
  out << doc.dump() << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Residual detector tuning, stealthy attack synthesis and simulation", "resdet"};
  app.require_subcommand(1);

  TuneArgs tune;
  auto* tune_cmd = app.add_subcommand("tune", "Threshold for a target false alarm rate");
  tune_cmd->add_option("--detector", tune.detector, "chi2 | windowed | cusum")->required();
  tune_cmd->add_option("--sensors", tune.sensors, "Sensor count p");
  tune_cmd->add_option("--window", tune.window, "Window length for the windowed detector");
  tune_cmd->add_option("--far", tune.far, "Target false alarm rate")->required();
  tune_cmd->add_option("--scenario", tune.scenario, "Scenario JSON (required for cusum)");
  tune_cmd->add_option("--mc", tune.mc, "Monte-Carlo samples for cusum tuning");
  tune_cmd->add_option("--bias", tune.bias, "CUSUM bias b");
  std::uint64_t tune_seed = 0;
  auto* tune_seed_opt = tune_cmd->add_option("--seed", tune_seed, "Random seed");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a scenario and write its trace");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--out", sim.out, "Trace CSV")->required();
  sim_cmd->add_option("--summary", sim.summary, "Summary JSON (stdout when omitted)");
  std::uint64_t sim_seed = 0;
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Random seed");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "beta/ell against window length");
  sweep_cmd->add_option("--sensors", sweep.sensors, "Sensor count p");
  sweep_cmd->add_option("--far", sweep.far, "Comma-separated false alarm rates")->required();
  sweep_cmd->add_option("--ell-max", sweep.ell_max, "Largest window length");
  sweep_cmd->add_option("--out", sweep.out, "Contours CSV")->required();

  ReactorArgs reac;
  auto* reactor_cmd = app.add_subcommand("reactor", "Chemical reactor benchmark");
  reactor_cmd->add_option("--out-dir", reac.out_dir, "Output directory")->required();
  std::uint64_t reactor_seed = 0;
  auto* reactor_seed_opt = reactor_cmd->add_option("--seed", reactor_seed, "Random seed");
  reactor_cmd->add_option("--runs", reac.runs, "Monte-Carlo runs per configuration");
  reactor_cmd->add_option("--mc", reac.mc, "Samples for CUSUM threshold tuning");

  ArlArgs arl;
  auto* arl_cmd = app.add_subcommand("arl", "Attack-free average run length");
  arl_cmd->add_option("--scenario", arl.scenario, "Scenario JSON")->required();
  arl_cmd->add_option("--runs", arl.runs, "Independent runs");
  arl_cmd->add_option("--cap", arl.cap, "Censoring cap in steps");
  std::uint64_t arl_seed = 0;
  auto* arl_seed_opt = arl_cmd->add_option("--seed", arl_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (tune_cmd->parsed()) {
      if (*tune_seed_opt) tune.seed = tune_seed;
      return cmd_tune(tune, out, err);
    }
    if (sim_cmd->parsed()) {
      if (*sim_seed_opt) sim.seed = sim_seed;
      return cmd_simulate(sim, out, err);
    }
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (reactor_cmd->parsed()) {
      if (*reactor_seed_opt) reac.seed = reactor_seed;
      return cmd_reactor(reac, out);
    }
    if (arl_cmd->parsed()) {
      if (*arl_seed_opt) arl.seed = arl_seed;
      return cmd_arl(arl, out, err);
    }
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace resdet
