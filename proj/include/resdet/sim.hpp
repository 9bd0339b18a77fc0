#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "resdet/attacks.hpp"
#include "resdet/detectors.hpp"
#include "resdet/model.hpp"

namespace resdet {

/// One simulation setup. Steps are numbered k = 1..steps; the attack (when
/// present) starts at k* = burn_in + 1.
struct Scenario {
  std::shared_ptr<const ClosedLoopModel> model;
  DetectorConfig detector;
  std::optional<AttackPlan> attack;
  long steps = 1000;
  long burn_in = 50;
  std::uint64_t seed = 1;
  int mc_runs = 200;
  Vector x0;     ///< empty means zero
  Vector xhat0;  ///< empty means zero

  long k_star() const { return burn_in + 1; }
  void validate() const;
};

struct StepRecord {
  long k = 0;
  Vector x;
  Vector e;
  Vector r;
  double z = 0.0;
  double statistic = 0.0;
  bool alarm = false;
  bool attack_active = false;

  double norm_x() const { return x.norm(); }
};

struct SimulationTrace {
  std::vector<StepRecord> records;
  std::vector<AlarmEvent> alarms;
  std::size_t alarms_after_attack = 0;
  /// Alarms once the attacked statistic is in its steady phase: from k* for
  /// chi2 and CUSUM, from k* + ell - 1 for windowed attacks.
  std::size_t alarms_steady_phase = 0;
  long k_star = 0;  ///< 0 when the scenario has no attack
  std::optional<DeviationBound> predicted;
  std::uint64_t seed = 0;
};

/// First step of the steady attacked phase for the plan.
long steady_phase_start(const AttackPlan& plan);

/// Single run; run_index selects an independent noise substream.
SimulationTrace run(const Scenario& scenario, std::size_t run_index = 0);

/// scenario.mc_runs independent runs; result order follows run index.
std::vector<SimulationTrace> run_ensemble(const Scenario& scenario);

/// Trailing mean over min(k, w) samples; same length as the input.
std::vector<double> moving_average(const std::vector<double>& series, std::size_t w);

struct SteadyDeviation {
  double measured = 0.0;   ///< |mean over runs and tail steps of x_k|
  double predicted = 0.0;
  double relative_error = 0.0;
  Vector mean_state;
  std::size_t tail_steps = 0;
};

/// Norm of the ensemble- and tail-averaged state, compared against the
/// prediction carried by the traces. Throws std::invalid_argument for
/// unattacked traces ("no prediction available").
SteadyDeviation measure_steady_deviation(const std::vector<SimulationTrace>& traces,
                                         double tail_fraction = 0.5);

struct ContourRow {
  double far = 0.0;
  int ell = 1;
  double beta = 0.0;
  double beta_over_ell = 0.0;
};

/// Window lengths 1..min(100, ell_max), then log-spaced (20 per decade) up
/// to ell_max inclusive.
std::vector<int> contour_window_lengths(int ell_max);

/// beta(ell) / ell for each false alarm rate and window length.
std::vector<ContourRow> sweep_window_contours(int sensors, const std::vector<double>& rates,
                                              int ell_max);

}  // namespace resdet
