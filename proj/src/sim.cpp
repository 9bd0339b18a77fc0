#include "resdet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "parallel.hpp"

namespace resdet {

void Scenario::validate() const {
  if (!model) throw std::invalid_argument("scenario has no model");
  detector.validate();
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be nonnegative");
  if (steps > 0 && burn_in >= steps) throw std::invalid_argument("burn_in must be < steps");
  if (mc_runs < 1) throw std::invalid_argument("mc_runs must be >= 1");
  const Eigen::Index n = model->plant().states();
  if (x0.size() != 0 && x0.size() != n) throw std::invalid_argument("x0 has wrong length");
  if (xhat0.size() != 0 && xhat0.size() != n) {
    throw std::invalid_argument("xhat0 has wrong length");
  }
  if (attack) {
    attack->validate();
    if (attack->kind != AttackKind::none && attack->k_star != k_star()) {
      throw std::invalid_argument("attack k* must equal burn_in + 1");
    }
    const Eigen::Index p = model->plant().sensors();
    const Eigen::Index len = attack->fixed_offset ? attack->fixed_offset->size()
                                                  : attack->direction.size();
    if (attack->kind != AttackKind::none && len != p) {
      throw std::invalid_argument("attack vector length must equal sensor count");
    }
  }
}

long steady_phase_start(const AttackPlan& plan) {
  if (plan.kind == AttackKind::windowed_static || plan.kind == AttackKind::windowed_pulse) {
    return plan.k_star + plan.detector.window - 1;
  }
  return plan.k_star;
}

SimulationTrace run(const Scenario& scenario, std::size_t run_index) {
  scenario.validate();
  const ClosedLoopModel& model = *scenario.model;
  const bool attacked = scenario.attack && scenario.attack->kind != AttackKind::none;

  SimulationTrace trace;
  trace.seed = substream_seed(scenario.seed, run_index);
  if (attacked) {
    trace.k_star = scenario.attack->k_star;
    trace.predicted = predicted_deviation(compute_M(model), *scenario.attack);
  }
  const long steady_start = attacked ? steady_phase_start(*scenario.attack) : 0;

  NoiseModel noise(model.plant(), trace.seed);
  LoopState state = LoopState::zero(model);
  if (scenario.x0.size() != 0) state.x = scenario.x0;
  if (scenario.xhat0.size() != 0) state.xhat = scenario.xhat0;
  Detector detector(scenario.detector);
  const Vector no_attack = Vector::Zero(model.plant().sensors());

  trace.records.reserve(static_cast<std::size_t>(scenario.steps));
  for (long k = 1; k <= scenario.steps; ++k) {
    state.k = k;
    const NoiseSample sample = noise.sample();
    const bool active = attacked && k >= trace.k_star;
    const Vector delta =
        active ? synthesize_attack(*scenario.attack, model, state, sample, detector) : no_attack;
    StepOutput out = step(model, state, sample, delta);
    const auto alarm = detector.update(out.distance, k);

    StepRecord rec;
    rec.k = k;
    rec.x = state.x;
    rec.e = state.error();
    rec.r = std::move(out.residual);
    rec.z = out.distance;
    rec.statistic = detector.statistic();
    rec.alarm = alarm.has_value();
    rec.attack_active = active;
    trace.records.push_back(std::move(rec));

    if (alarm) {
      trace.alarms.push_back(*alarm);
      if (active) ++trace.alarms_after_attack;
      if (active && k >= steady_start) ++trace.alarms_steady_phase;
    }
    state = std::move(out.next);
  }
  return trace;
}

std::vector<SimulationTrace> run_ensemble(const Scenario& scenario) {
  scenario.validate();
  std::vector<SimulationTrace> traces(static_cast<std::size_t>(scenario.mc_runs));
  detail::parallel_for(traces.size(), [&](std::size_t i) { traces[i] = run(scenario, i); });
  return traces;
}

std::vector<double> moving_average(const std::vector<double>& series, std::size_t w) {
  if (w == 0) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= w) sum -= series[i - w];
    const std::size_t count = std::min(i + 1, w);
    out[i] = sum / static_cast<double>(count);
  }
  return out;
}

SteadyDeviation measure_steady_deviation(const std::vector<SimulationTrace>& traces,
                                         double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw std::invalid_argument("tail fraction must lie in (0, 1)");
  }
  if (traces.empty()) throw std::invalid_argument("no traces to measure");
  const SimulationTrace& first = traces.front();
  if (first.k_star == 0 || !first.predicted) {
    throw std::invalid_argument("no prediction available: scenario is not attacked");
  }
  const long steps = static_cast<long>(first.records.size());
  const long post = steps - first.k_star + 1;
  if (post <= 0) throw std::invalid_argument("trace ends before the attack starts");
  const long tail = std::max(1L, static_cast<long>(std::floor(tail_fraction * post)));

  SteadyDeviation result;
  result.mean_state = Vector::Zero(first.records.front().x.size());
  for (const SimulationTrace& trace : traces) {
    if (static_cast<long>(trace.records.size()) != steps || trace.k_star != first.k_star) {
      throw std::invalid_argument("ensemble traces have mismatched shapes");
    }
    Vector run_sum = Vector::Zero(result.mean_state.size());
    for (long i = steps - tail; i < steps; ++i) run_sum += trace.records[static_cast<std::size_t>(i)].x;
    result.mean_state += run_sum;
  }
  result.mean_state /= static_cast<double>(tail) * static_cast<double>(traces.size());
  result.tail_steps = static_cast<std::size_t>(tail);
  result.measured = result.mean_state.norm();
  result.predicted = first.predicted->gamma;
  result.relative_error = result.predicted > 0.0
                              ? std::abs(result.measured - result.predicted) / result.predicted
                              : result.measured;
  return result;
}

std::vector<int> contour_window_lengths(int ell_max) {
  if (ell_max < 1) throw std::invalid_argument("ell_max must be >= 1");
  std::set<int> lengths;
  for (int ell = 1; ell <= std::min(100, ell_max); ++ell) lengths.insert(ell);
  if (ell_max > 100) {
    for (int i = 1;; ++i) {
      const int ell = static_cast<int>(std::lround(100.0 * std::pow(10.0, i / 20.0)));
      if (ell >= ell_max) break;
      lengths.insert(ell);
    }
    lengths.insert(ell_max);
  }
  return {lengths.begin(), lengths.end()};
}

std::vector<ContourRow> sweep_window_contours(int sensors, const std::vector<double>& rates,
                                              int ell_max) {
  if (rates.empty()) throw std::invalid_argument("at least one false alarm rate required");
  const std::vector<int> lengths = contour_window_lengths(ell_max);
  std::vector<ContourRow> rows;
  rows.reserve(rates.size() * lengths.size());
  for (double far : rates) {
    for (int ell : lengths) {
      const double beta = tune_windowed(sensors, ell, far);
      rows.push_back({far, ell, beta, beta / ell});
    }
  }
  return rows;
}

}  // namespace resdet
