#include "resdet/reactor.hpp"

#include <stdexcept>

namespace resdet::reactor {

Matrix F() {
  Matrix m(4, 4);
  m << 0.0273, 0, 0, 0,
       0, 0.0268, 0.0001, 0.0068,
       0, 0.0004, 0, 0.0018,
       0, 0.0619, 0.0055, 0.2478;
  return m;
}

Matrix G() {
  Matrix m(4, 3);
  m << 0.0271, 0, 0,
       0, 0.2665, 0.0001,
       0, 0.0005, 0.0276,
       0, 0.0761, 0.0114;
  return m;
}

Matrix C() {
  Matrix m = Matrix::Zero(3, 4);
  m.leftCols(3).setIdentity();
  return m;
}

Matrix K() {
  Matrix m(3, 4);
  m << 3.2856, -0.7139, -0.8301, 1.4940,
       -0.0244, 5.0912, 2.0507, -3.6645,
       0.2707, 54.5562, 99.8275, -117.5190;
  return m;
}

Matrix L() {
  Matrix m(4, 3);
  m << 0.0033, 0, 0,
       0, 0.0033, 0,
       0, 0, 0,
       0, 0.0147, 101.3810;
  return m;
}

Matrix R2() { return 100.0 * Matrix::Identity(3, 3); }

Matrix R1_printed() {
  Matrix m(4, 4);
  m << 13.8785, 0, 0, 0,
       0, 13.6531, 0.0141, 2.1122,
       0, 0.0141, 1.3808, 0.2623,
       0, 2.1122, 2.623, 34.1805;
  return m;
}

PlantModel plant() {
  const Matrix r1 = R1_printed();
  return {F(), G(), C(), 0.5 * (r1 + r1.transpose()), R2()};
}

std::string r1_adjustment() {
  return "R1 symmetrized as (R1 + R1^T)/2: printed entries (3,4)=0.2623 and "
         "(4,3)=2.623 both replaced by 1.44265";
}

ClosedLoopModel model() { return build_closed_loop(plant(), K(), L()); }

const BenchmarkCase& BenchmarkResult::find(const std::string& name) const {
  for (const auto& c : cases) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no benchmark case named " + name);
}

BenchmarkResult run_benchmark(const BenchmarkOptions& options) {
  BenchmarkResult result;
  result.options = options;
  result.model = std::make_shared<const ClosedLoopModel>(model());
  const ClosedLoopModel& loop = *result.model;
  const int p = static_cast<int>(loop.plant().sensors());

  result.M = compute_M(loop);
  result.worst = worst_direction(result.M);
  result.alpha = tune_chi2(p, options.false_alarm_rate);
  result.beta4 = tune_windowed(p, 4, options.false_alarm_rate);
  result.beta50 = tune_windowed(p, 50, options.false_alarm_rate);
  result.cusum = tune_cusum_tau(loop, options.cusum_bias, options.false_alarm_rate,
                                options.tau_samples, substream_seed(options.seed, 0xC05));

  const std::vector<std::pair<std::string, DetectorConfig>> detectors = {
      {"chi2", DetectorConfig::chi2(result.alpha)},
      {"windowed4", DetectorConfig::windowed(result.beta4, 4)},
      {"windowed50", DetectorConfig::windowed(result.beta50, 50)},
      {"cusum", DetectorConfig::cusum(result.cusum.tau, options.cusum_bias)},
  };

  const long k_star = options.burn_in + 1;
  std::uint64_t stream = 1;
  for (const auto& [label, config] : detectors) {
    for (const std::string direction : {"worst", "ones"}) {
      AttackPlan plan = make_attack_plan(config, k_star, result.worst.direction);
      if (direction == "ones") plan.fixed_offset = Vector::Ones(p);
      plan.validate();

      Scenario scenario;
      scenario.model = result.model;
      scenario.detector = config;
      scenario.attack = plan;
      scenario.steps = options.steps;
      scenario.burn_in = options.burn_in;
      scenario.mc_runs = options.runs;
      scenario.seed = substream_seed(options.seed, stream++);

      std::vector<SimulationTrace> traces = run_ensemble(scenario);
      BenchmarkCase c;
      c.name = label + "_" + direction;
      c.direction = direction;
      c.detector = config;
      c.attack = plan;
      c.deviation = measure_steady_deviation(traces, 0.5);
      for (const auto& t : traces) {
        c.alarms_after_attack += t.alarms_after_attack;
        c.alarms_steady_phase += t.alarms_steady_phase;
      }
      c.sample_trace = std::move(traces.front());
      result.cases.push_back(std::move(c));
    }
  }
  return result;
}

}  // namespace resdet::reactor
