#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resdet/sim.hpp"

/// Linearized well-stirred chemical reactor with heat exchanger (4 states,
/// 3 inputs, 3 sensors) and its printed controller/estimator gains.
namespace resdet::reactor {

Matrix F();
Matrix G();
Matrix C();
Matrix K();
Matrix L();
Matrix R2();
/// Process-noise covariance as printed; entries (3,4) and (4,3) disagree.
Matrix R1_printed();

/// Plant with R1 replaced by (R1 + R1^T) / 2.
PlantModel plant();

/// Description of the R1 symmetrization for reports.
std::string r1_adjustment();

/// Closed loop with the printed K and L.
ClosedLoopModel model();

struct BenchmarkOptions {
  std::uint64_t seed = 1;
  int runs = 200;
  long steps = 1000;
  long burn_in = 50;
  double false_alarm_rate = 0.05;
  double cusum_bias = 3.0;
  std::size_t tau_samples = 1000000;
};

struct BenchmarkCase {
  std::string name;       ///< e.g. "windowed4_worst"
  std::string direction;  ///< "worst" or "ones"
  DetectorConfig detector;
  AttackPlan attack;
  SteadyDeviation deviation;
  SimulationTrace sample_trace;  ///< run 0
  std::size_t alarms_after_attack = 0;  ///< summed over the ensemble
  std::size_t alarms_steady_phase = 0;
};

struct BenchmarkResult {
  BenchmarkOptions options;
  std::shared_ptr<const ClosedLoopModel> model;
  Matrix M;
  WorstDirection worst;
  double alpha = 0.0;
  double beta4 = 0.0;
  double beta50 = 0.0;
  CusumTuning cusum;
  std::vector<BenchmarkCase> cases;

  const BenchmarkCase& find(const std::string& name) const;
};

/// Runs chi2, windowed (4), windowed (50) and CUSUM under the worst-case
/// direction and the all-ones naive offset (delta_bar = 1), each as an
/// ensemble of `runs` traces.
BenchmarkResult run_benchmark(const BenchmarkOptions& options);

}  // namespace resdet::reactor
