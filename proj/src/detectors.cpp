#include "resdet/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace resdet {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::chi2:
      return "chi2";
    case DetectorKind::windowed:
      return "windowed";
    case DetectorKind::cusum:
      return "cusum";
  }
  return "unknown";
}

DetectorKind parse_detector_kind(std::string_view name) {
  if (name == "chi2") return DetectorKind::chi2;
  if (name == "windowed") return DetectorKind::windowed;
  if (name == "cusum") return DetectorKind::cusum;
  throw std::invalid_argument("unknown detector kind '" + std::string(name) + "'");
}

DetectorConfig DetectorConfig::chi2(double alpha) {
  DetectorConfig c{DetectorKind::chi2, alpha, 1, 0.0};
  c.validate();
  return c;
}

DetectorConfig DetectorConfig::windowed(double beta, int ell) {
  DetectorConfig c{DetectorKind::windowed, beta, ell, 0.0};
  c.validate();
  return c;
}

DetectorConfig DetectorConfig::cusum(double tau, double b) {
  DetectorConfig c{DetectorKind::cusum, tau, 1, b};
  c.validate();
  return c;
}

void DetectorConfig::validate() const {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw std::invalid_argument("detector threshold must be positive and finite");
  }
  if (kind == DetectorKind::windowed && window < 1) {
    throw std::invalid_argument("window must be >= 1");
  }
  if (kind == DetectorKind::cusum && (!(bias > 0.0) || !std::isfinite(bias))) {
    throw std::invalid_argument("CUSUM bias must be positive");
  }
}

ChiSquaredDetector::ChiSquaredDetector(double alpha) : alpha_(alpha) {
  DetectorConfig::chi2(alpha);
}

std::optional<AlarmEvent> ChiSquaredDetector::update(double z, long k) {
  last_ = z;
  if (z > alpha_) return AlarmEvent{k, DetectorKind::chi2, z};
  return std::nullopt;
}

WindowedChiSquaredDetector::WindowedChiSquaredDetector(double beta, int ell)
    : beta_(beta) {
  DetectorConfig::windowed(beta, ell);
  buffer_.assign(static_cast<std::size_t>(ell), 0.0);
}

std::optional<AlarmEvent> WindowedChiSquaredDetector::update(double z, long k) {
  sum_ += z - buffer_[head_];
  buffer_[head_] = z;
  head_ = (head_ + 1) % buffer_.size();
  if (count_ < buffer_.size()) ++count_;
  // Re-anchor the running sum once per pass over the buffer.
  if (head_ == 0) sum_ = buffer_sum();
  if (full() && sum_ > beta_) return AlarmEvent{k, DetectorKind::windowed, sum_};
  return std::nullopt;
}

double WindowedChiSquaredDetector::retained_sum() const {
  if (!full()) return sum_;
  return sum_ - buffer_[head_];
}

double WindowedChiSquaredDetector::buffer_sum() const {
  return std::accumulate(buffer_.begin(), buffer_.end(), 0.0);
}

CusumDetector::CusumDetector(double tau, double b) : tau_(tau), bias_(b) {
  DetectorConfig::cusum(tau, b);
}

std::optional<AlarmEvent> CusumDetector::update(double z, long k) {
  if (sum_ > tau_) {
    const double exceeded = sum_;
    sum_ = 0.0;
    return AlarmEvent{k - 1, DetectorKind::cusum, exceeded};
  }
  sum_ = std::max(0.0, sum_ + z - bias_);
  return std::nullopt;
}

namespace {

std::variant<ChiSquaredDetector, WindowedChiSquaredDetector, CusumDetector> make_impl(
    const DetectorConfig& config) {
  config.validate();
  switch (config.kind) {
    case DetectorKind::chi2:
      return ChiSquaredDetector(config.threshold);
    case DetectorKind::windowed:
      return WindowedChiSquaredDetector(config.threshold, config.window);
    case DetectorKind::cusum:
      return CusumDetector(config.threshold, config.bias);
  }
  throw std::invalid_argument("unknown detector kind");
}

void require_rate(double rate) {
  if (!(rate > 0.0) || !(rate < 1.0)) {
    throw std::domain_error("false alarm rate must lie in (0, 1)");
  }
}

}  // namespace

Detector::Detector(const DetectorConfig& config) : config_(config), impl_(make_impl(config)) {}

std::optional<AlarmEvent> Detector::update(double z, long k) {
  return std::visit([&](auto& d) { return d.update(z, k); }, impl_);
}

double Detector::statistic() const {
  return std::visit([](const auto& d) { return d.statistic(); }, impl_);
}

double tune_chi2(int sensors, double false_alarm_rate) {
  return tune_windowed(sensors, 1, false_alarm_rate);
}

double tune_windowed(int sensors, int window, double false_alarm_rate) {
  if (sensors < 1) throw std::domain_error("sensor count must be >= 1");
  if (window < 1) throw std::domain_error("window must be >= 1");
  require_rate(false_alarm_rate);
  const double dof = static_cast<double>(sensors) * static_cast<double>(window);
  return 2.0 * inverse_regularized_lower_gamma(0.5 * dof, 1.0 - false_alarm_rate);
}

double cusum_alarm_rate(const std::vector<double>& z, double tau, double b) {
  if (z.empty()) return 0.0;
  CusumDetector detector(tau, b);
  std::size_t alarms = 0;
  long k = 1;
  for (double value : z) {
    if (detector.update(value, k++)) ++alarms;
  }
  return static_cast<double>(alarms) / static_cast<double>(z.size());
}

CusumTuning tune_cusum_tau(const std::vector<double>& z, double bias, int sensors,
                           double false_alarm_rate) {
  require_rate(false_alarm_rate);
  if (!(bias > 0.0)) throw std::domain_error("CUSUM bias must be positive");
  if (z.empty()) throw std::invalid_argument("tune_cusum_tau: empty distance stream");

  CusumTuning result;
  result.target_rate = false_alarm_rate;
  result.samples = z.size();
  if (bias < sensors) {
    result.diagnostics.push_back("bias too small: b < p lets the statistic drift upward");
  }

  auto rate = [&](double tau) { return cusum_alarm_rate(z, tau, bias); };
  constexpr double kTauFloor = 1e-9;

  const double floor_rate = rate(kTauFloor);
  if (floor_rate < false_alarm_rate) {
    result.tau = kTauFloor;
    result.achieved_rate = floor_rate;
    result.attainable = false;
    result.diagnostics.push_back("rate unattainable: alarm frequency stays below target for every tau > 0");
    return result;
  }

  double lo = kTauFloor;
  double hi = std::max(1.0, bias);
  while (rate(hi) > false_alarm_rate) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("tune_cusum_tau: failed to bracket threshold");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (rate(mid) > false_alarm_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double rate_lo = rate(lo);
  const double rate_hi = rate(hi);
  if (std::abs(rate_lo - false_alarm_rate) < std::abs(rate_hi - false_alarm_rate)) {
    result.tau = lo;
    result.achieved_rate = rate_lo;
  } else {
    result.tau = hi;
    result.achieved_rate = rate_hi;
  }
  if (std::abs(result.achieved_rate - false_alarm_rate) > 0.05 * false_alarm_rate) {
    result.diagnostics.push_back("achieved rate misses the target by more than 5% relative");
  }
  return result;
}

CusumTuning tune_cusum_tau(const ClosedLoopModel& model, double bias,
                           double false_alarm_rate, std::size_t samples,
                           std::uint64_t seed) {
  require_rate(false_alarm_rate);
  if (samples < 100000) {
    throw std::invalid_argument("tune_cusum_tau: at least 1e5 samples required");
  }
  const std::vector<double> z = simulate_attack_free_distances(model, samples, seed);
  return tune_cusum_tau(z, bias, static_cast<int>(model.plant().sensors()),
                        false_alarm_rate);
}

AlarmFrequency replay_alarm_frequency(const std::vector<double>& z,
                                      const DetectorConfig& config) {
  Detector detector(config);
  AlarmFrequency freq;
  long k = 1;
  for (double value : z) {
    if (detector.update(value, k++)) ++freq.alarms;
  }
  freq.steps = z.size();
  freq.rate = z.empty() ? 0.0 : static_cast<double>(freq.alarms) / static_cast<double>(freq.steps);
  return freq;
}

AlarmFrequency measure_alarm_frequency(const ClosedLoopModel& model,
                                       const DetectorConfig& config, std::size_t steps,
                                       std::uint64_t seed, std::size_t burn_in) {
  return replay_alarm_frequency(simulate_attack_free_distances(model, steps, seed, burn_in),
                                config);
}

ArlEstimate estimate_arl(const ClosedLoopModel& model, const DetectorConfig& config,
                         std::size_t runs, std::uint64_t seed, std::size_t cap,
                         std::size_t burn_in, std::size_t rate_steps) {
  config.validate();
  if (runs == 0) throw std::invalid_argument("estimate_arl: at least one run required");
  if (cap == 0) throw std::invalid_argument("estimate_arl: cap must be positive");

  std::vector<double> lengths(runs, 0.0);
  std::vector<char> censored(runs, 0);
  detail::parallel_for(runs, [&](std::size_t r) {
    NoiseModel noise(model.plant(), substream_seed(seed, r));
    LoopState state = LoopState::zero(model);
    const Vector no_attack = Vector::Zero(model.plant().sensors());
    for (std::size_t i = 0; i < burn_in; ++i) {
      state = step(model, state, noise.sample(), no_attack).next;
    }
    Detector detector(config);
    for (std::size_t k = 1; k <= cap; ++k) {
      StepOutput out = step(model, state, noise.sample(), no_attack);
      state = std::move(out.next);
      if (auto alarm = detector.update(out.distance, static_cast<long>(k))) {
        lengths[r] = static_cast<double>(alarm->k_star);
        return;
      }
    }
    lengths[r] = static_cast<double>(cap);
    censored[r] = 1;
  });

  ArlEstimate est;
  est.runs = runs;
  est.censored_runs = static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1));
  const double n = static_cast<double>(runs);
  est.arl = std::accumulate(lengths.begin(), lengths.end(), 0.0) / n;
  double ss = 0.0;
  for (double len : lengths) ss += (len - est.arl) * (len - est.arl);
  const double sd = runs > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  est.half_width = 1.96 * sd / std::sqrt(n);
  est.alarm_rate = 1.0 / est.arl;
  if (est.censored_runs > 0) {
    est.warnings.push_back("censored runs: " + std::to_string(est.censored_runs) + " of " +
                           std::to_string(runs) + " reached the cap of " +
                           std::to_string(cap) + " steps; ARL is a lower bound");
  }
  if (rate_steps > 0) {
    est.per_step_rate =
        measure_alarm_frequency(model, config, rate_steps, substream_seed(seed, runs + 1)).rate;
  }
  return est;
}

}  // namespace resdet
