#include "resdet/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "resdet/attacks.hpp"
#include "resdet/errors.hpp"

namespace resdet {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ScenarioError(where + ": missing key '" + key + "'");
  }
  return obj.at(key);
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ScenarioError(name + " must be a number");
  return v.get<double>();
}

long integer(const json& v, const std::string& name) {
  if (!v.is_number_integer()) throw ScenarioError(name + " must be an integer");
  return v.get<long>();
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ScenarioError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ScenarioError(where + ": unknown key '" + key + "'");
  }
}

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << name << " must be " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    throw ScenarioError(msg.str());
  }
}

Matrix symmetrized(const Matrix& m, const std::string& name, std::vector<std::string>& notes) {
  if (m.rows() != m.cols() || is_symmetric(m, 0.0)) return m;
  const double gap = (m - m.transpose()).cwiseAbs().maxCoeff();
  std::ostringstream msg;
  msg.precision(6);
  msg << name << " symmetrized as (" << name << " + " << name << "^T)/2 (max asymmetry " << gap
      << ")";
  notes.push_back(msg.str());
  return 0.5 * (m + m.transpose());
}

PlantModel parse_plant(const json& doc, std::vector<std::string>& notes) {
  const json& p = require(doc, "plant", "scenario");
  reject_unknown(p, "plant", {"F", "G", "C", "R1", "R2"});
  PlantModel plant;
  plant.F = matrix_from_json(require(p, "F", "plant"), "F");
  plant.G = matrix_from_json(require(p, "G", "plant"), "G");
  plant.C = matrix_from_json(require(p, "C", "plant"), "C");
  plant.R1 = matrix_from_json(require(p, "R1", "plant"), "R1");
  plant.R2 = matrix_from_json(require(p, "R2", "plant"), "R2");

  const Eigen::Index n = plant.F.rows();
  expect_shape(plant.F, n, n, "F");
  if (plant.G.rows() != n) throw ScenarioError("G must have as many rows as F");
  if (plant.C.cols() != n) throw ScenarioError("C must have as many columns as F");
  expect_shape(plant.R1, n, n, "R1");
  expect_shape(plant.R2, plant.C.rows(), plant.C.rows(), "R2");
  plant.R1 = symmetrized(plant.R1, "R1", notes);
  plant.R2 = symmetrized(plant.R2, "R2", notes);
  try {
    plant.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return plant;
}

struct DetectorSpec {
  DetectorConfig config;
  double far = 0.0;
  std::optional<CusumTuning> tuning;
};

DetectorSpec parse_detector(const json& doc, const ClosedLoopModel& model, std::uint64_t seed) {
  const json& d = require(doc, "detector", "scenario");
  reject_unknown(d, "detector", {"kind", "far", "threshold", "alpha", "beta", "tau", "window", "b", "mc"});
  const json& kind_json = require(d, "kind", "detector");
  if (!kind_json.is_string()) throw ScenarioError("detector.kind must be a string");
  DetectorSpec spec;
  DetectorConfig& cfg = spec.config;
  try {
    cfg.kind = parse_detector_kind(kind_json.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  const int p = static_cast<int>(model.plant().sensors());

  std::optional<double> threshold;
  for (const char* key : {"threshold", "alpha", "beta", "tau"}) {
    if (d.contains(key)) {
      if (threshold) throw ScenarioError("detector: give exactly one threshold key");
      threshold = number(d.at(key), std::string("detector.") + key);
    }
  }
  if (d.contains("window")) {
    if (cfg.kind != DetectorKind::windowed) throw ScenarioError("detector.window only applies to windowed");
    cfg.window = static_cast<int>(integer(d.at("window"), "detector.window"));
    if (cfg.window < 1) throw ScenarioError("window must be >= 1");
  } else if (cfg.kind == DetectorKind::windowed) {
    throw ScenarioError("detector: windowed detector needs 'window'");
  }
  if (d.contains("b")) {
    if (cfg.kind != DetectorKind::cusum) throw ScenarioError("detector.b only applies to cusum");
    cfg.bias = number(d.at("b"), "detector.b");
  } else if (cfg.kind == DetectorKind::cusum) {
    throw ScenarioError("detector: cusum detector needs 'b'");
  }

  if (threshold && d.contains("far")) {
    throw ScenarioError("detector: give either a threshold or 'far', not both");
  }
  if (threshold) {
    cfg.threshold = *threshold;
  } else {
    if (!d.contains("far")) throw ScenarioError("detector: need a threshold or 'far'");
    spec.far = number(d.at("far"), "detector.far");
    if (!(spec.far > 0.0 && spec.far < 1.0)) {
      throw ScenarioError("detector.far must lie in (0, 1)");
    }
    switch (cfg.kind) {
      case DetectorKind::chi2:
        cfg.threshold = tune_chi2(p, spec.far);
        break;
      case DetectorKind::windowed:
        cfg.threshold = tune_windowed(p, cfg.window, spec.far);
        break;
      case DetectorKind::cusum: {
        const long samples = d.contains("mc") ? integer(d.at("mc"), "detector.mc") : 1000000;
        if (samples < 100000) throw ScenarioError("detector.mc must be >= 100000");
        if (!(cfg.bias > 0.0)) throw ScenarioError("CUSUM bias must be positive");
        spec.tuning = tune_cusum_tau(model, cfg.bias, spec.far,
                                     static_cast<std::size_t>(samples), substream_seed(seed, 0xC05));
        cfg.threshold = spec.tuning->tau;
        break;
      }
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return spec;
}

}  // namespace

Matrix matrix_from_json(const json& rows, const std::string& name) {
  if (!rows.is_array() || rows.empty()) throw ScenarioError(name + " must be a non-empty array of rows");
  const std::size_t r = rows.size();
  std::size_t c = 0;
  for (std::size_t i = 0; i < r; ++i) {
    if (!rows[i].is_array() || rows[i].empty()) throw ScenarioError(name + " rows must be non-empty arrays");
    if (i == 0) c = rows[i].size();
    if (rows[i].size() != c) throw ScenarioError(name + " has ragged rows");
  }
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          number(rows[i][j], name + " entry");
    }
  }
  return m;
}

Vector vector_from_json(const json& values, const std::string& name) {
  if (!values.is_array() || values.empty()) throw ScenarioError(name + " must be a non-empty array");
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(values[i], name + " entry");
  }
  return v;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

LoadedScenario load_scenario(const json& doc, std::uint64_t default_seed,
                             std::optional<std::uint64_t> seed_override) {
  if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
  reject_unknown(doc, "scenario", {"plant", "controller", "estimator", "detector", "attack", "sim", "description"});
  LoadedScenario out;
  Scenario& s = out.scenario;

  const json sim = doc.value("sim", json::object());
  reject_unknown(sim, "sim", {"steps", "burn_in", "seed", "mc_runs", "x0", "xhat0"});
  if (sim.contains("steps")) s.steps = integer(sim.at("steps"), "sim.steps");
  if (sim.contains("burn_in")) s.burn_in = integer(sim.at("burn_in"), "sim.burn_in");
  if (sim.contains("mc_runs")) s.mc_runs = static_cast<int>(integer(sim.at("mc_runs"), "sim.mc_runs"));
  s.seed = default_seed;
  if (sim.contains("seed")) {
    if (!sim.at("seed").is_number_unsigned()) throw ScenarioError("sim.seed must be a nonnegative integer");
    s.seed = sim.at("seed").get<std::uint64_t>();
    out.seed_in_file = true;
  }
  if (seed_override) s.seed = *seed_override;

  PlantModel plant = parse_plant(doc, out.adjustments);
  const json& controller = require(doc, "controller", "scenario");
  reject_unknown(controller, "controller", {"K"});
  const Matrix K = matrix_from_json(require(controller, "K", "controller"), "K");
  expect_shape(K, plant.inputs(), plant.states(), "K");
  std::optional<Matrix> L;
  if (doc.contains("estimator")) {
    const json& est = doc.at("estimator");
    reject_unknown(est, "estimator", {"L"});
    if (est.contains("L")) {
      L = matrix_from_json(est.at("L"), "L");
      expect_shape(*L, plant.states(), plant.sensors(), "L");
    }
  }
  if (sim.contains("x0")) s.x0 = vector_from_json(sim.at("x0"), "sim.x0");
  if (sim.contains("xhat0")) s.xhat0 = vector_from_json(sim.at("xhat0"), "sim.xhat0");

  s.model = std::make_shared<const ClosedLoopModel>(build_closed_loop(std::move(plant), K, L));
  const ClosedLoopModel& model = *s.model;
  const Eigen::Index p = model.plant().sensors();

  DetectorSpec det = parse_detector(doc, model, s.seed);
  s.detector = det.config;
  out.far = det.far;
  out.cusum_tuning = det.tuning;

  const json attack = doc.value("attack", json::object({{"kind", "none"}}));
  reject_unknown(attack, "attack", {"kind", "direction", "k_star", "mode", "magnitude", "margin"});
  AttackKind kind = matching_attack(s.detector.kind);
  if (attack.contains("kind")) {
    if (!attack.at("kind").is_string()) throw ScenarioError("attack.kind must be a string");
    const std::string name = attack.at("kind").get<std::string>();
    if (name != "matched") {
      try {
        kind = parse_attack_kind(name);
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
      }
    }
  }
  if (attack.contains("k_star")) {
    const long k_star = integer(attack.at("k_star"), "attack.k_star");
    if (k_star < 1) throw ScenarioError("attack.k_star must be >= 1");
    if (sim.contains("burn_in") && k_star != s.burn_in + 1) {
      throw ScenarioError("attack.k_star must equal sim.burn_in + 1");
    }
    s.burn_in = k_star - 1;
  }

  if (kind != AttackKind::none) {
    AttackPlan plan;
    plan.kind = kind;
    plan.k_star = s.k_star();
    plan.detector = s.detector;
    const json direction = attack.value("direction", json("worst"));
    if (direction.is_string()) {
      out.direction_label = direction.get<std::string>();
      if (out.direction_label == "worst") {
        plan.direction = worst_direction(compute_M(model)).direction;
      } else if (out.direction_label == "ones") {
        plan.direction = Vector::Ones(p).normalized();
        plan.fixed_offset = Vector::Ones(p);
      } else if (out.direction_label == "unit-ones") {
        plan.direction = Vector::Ones(p).normalized();
      } else {
        throw ScenarioError("attack.direction must be \"worst\", \"ones\", \"unit-ones\" or a vector");
      }
    } else {
      out.direction_label = "explicit";
      const Vector v = vector_from_json(direction, "attack.direction");
      if (v.size() != p) throw ScenarioError("attack.direction must have one entry per sensor");
      if (!(v.norm() > 0.0)) throw ScenarioError("attack.direction must be nonzero");
      if (std::abs(v.norm() - 1.0) > 1e-12) {
        out.adjustments.push_back("attack.direction normalized to unit length");
      }
      plan.direction = v.normalized();
    }
    if (attack.contains("mode")) {
      const std::string mode = attack.at("mode").is_string() ? attack.at("mode").get<std::string>() : "";
      if (mode == "static") {
      } else if (mode == "pulse" && kind == AttackKind::windowed_static) {
        plan.kind = AttackKind::windowed_pulse;
      } else if (mode == "greedy" && kind == AttackKind::windowed_static) {
        plan.transient = WindowedTransient::greedy_saturating;
      } else if (mode == "exact" && kind == AttackKind::cusum) {
        plan.cusum_first_step = CusumFirstStep::exact_saturating;
      } else {
        throw ScenarioError("attack.mode '" + mode + "' does not apply to a " +
                            std::string(to_string(kind)) + " attack");
      }
    }
    if (attack.contains("magnitude")) {
      const json& m = attack.at("magnitude");
      if (m == "budget") {
        plan.magnitude_rule = WindowedMagnitude::budget;
      } else if (m == "literal") {
        plan.magnitude_rule = WindowedMagnitude::literal;
      } else {
        throw ScenarioError("attack.magnitude must be \"budget\" or \"literal\"");
      }
    }
    if (attack.contains("margin")) plan.margin = number(attack.at("margin"), "attack.margin");
    s.attack = plan;
  }

  try {
    s.validate();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path + ": malformed JSON: " + e.what());
  }
}

LoadedScenario load_scenario_file(const std::string& path, std::uint64_t default_seed,
                                  std::optional<std::uint64_t> seed_override) {
  return load_scenario(read_json_file(path), default_seed, seed_override);
}

}  // namespace resdet
