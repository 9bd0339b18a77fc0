#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "resdet/model.hpp"

namespace resdet {

enum class DetectorKind { chi2, windowed, cusum };

std::string_view to_string(DetectorKind kind);
DetectorKind parse_detector_kind(std::string_view name);

struct AlarmEvent {
  long k_star = 0;
  DetectorKind kind = DetectorKind::chi2;
  double statistic = 0.0;  ///< value that exceeded the threshold
};

/// Threshold set for one detector. `threshold` is alpha, beta or tau
/// depending on the kind; `window` is used by the windowed detector only and
/// `bias` by CUSUM only.
struct DetectorConfig {
  DetectorKind kind = DetectorKind::chi2;
  double threshold = 0.0;
  int window = 1;
  double bias = 0.0;

  static DetectorConfig chi2(double alpha);
  static DetectorConfig windowed(double beta, int ell);
  static DetectorConfig cusum(double tau, double b);

  void validate() const;
};

/// Static test: alarm iff z > alpha.
class ChiSquaredDetector {
 public:
  explicit ChiSquaredDetector(double alpha);

  std::optional<AlarmEvent> update(double z, long k);
  double statistic() const { return last_; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  double last_ = 0.0;
};

/// Sliding-window sum of the last ell distance measures; alarm iff the sum
/// exceeds beta. Alarms are only evaluated once the window is full.
class WindowedChiSquaredDetector {
 public:
  WindowedChiSquaredDetector(double beta, int ell);

  std::optional<AlarmEvent> update(double z, long k);

  /// Current window sum w.
  double statistic() const { return sum_; }
  double beta() const { return beta_; }
  int window() const { return static_cast<int>(buffer_.size()); }
  bool full() const { return count_ >= buffer_.size(); }

  /// Sum of the entries that remain after the next push, i.e. w minus the
  /// value about to be evicted.
  double retained_sum() const;

  /// Exact sum of the buffer contents (for drift checks).
  double buffer_sum() const;

 private:
  double beta_;
  std::vector<double> buffer_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  double sum_ = 0.0;
};

/// One-sided CUSUM on the distance measure:
///   S_{k-1} <= tau:  S_k = max(0, S_{k-1} + z_k - b)
///   S_{k-1} >  tau:  S_k = 0 and an alarm with k* = k - 1.
class CusumDetector {
 public:
  CusumDetector(double tau, double b);

  std::optional<AlarmEvent> update(double z, long k);
  double statistic() const { return sum_; }
  double tau() const { return tau_; }
  double bias() const { return bias_; }

 private:
  double tau_;
  double bias_;
  double sum_ = 0.0;
};

/// Type-erased detector built from a DetectorConfig.
class Detector {
 public:
  explicit Detector(const DetectorConfig& config);

  std::optional<AlarmEvent> update(double z, long k);
  double statistic() const;
  const DetectorConfig& config() const { return config_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&impl_);
  }

 private:
  DetectorConfig config_;
  std::variant<ChiSquaredDetector, WindowedChiSquaredDetector, CusumDetector> impl_;
};

/// alpha = 2 P^-1(p/2, 1 - A*).
double tune_chi2(int sensors, double false_alarm_rate);

/// beta = 2 P^-1(p ell / 2, 1 - A*).
double tune_windowed(int sensors, int window, double false_alarm_rate);

struct CusumTuning {
  double tau = 0.0;
  double achieved_rate = 0.0;  ///< per-step alarm frequency on the tuning stream
  double target_rate = 0.0;
  std::size_t samples = 0;
  bool attainable = true;
  std::vector<std::string> diagnostics;
};

/// Per-step alarm frequency of a CUSUM(tau, b) replayed over a z stream.
double cusum_alarm_rate(const std::vector<double>& z, double tau, double b);

/// Bisection on tau over one simulated attack-free z stream of `samples`
/// steps so that the per-step alarm frequency matches the target.
/// Requires samples >= 1e5 and 0 < target < 1.
CusumTuning tune_cusum_tau(const ClosedLoopModel& model, double bias,
                           double false_alarm_rate, std::size_t samples,
                           std::uint64_t seed);

/// Same search over a caller-provided z stream.
CusumTuning tune_cusum_tau(const std::vector<double>& z, double bias, int sensors,
                           double false_alarm_rate);

struct ArlEstimate {
  double arl = 0.0;          ///< mean run length over the runs
  double alarm_rate = 0.0;   ///< 1 / ARL
  double half_width = 0.0;   ///< 95% confidence half-width of the ARL
  double per_step_rate = 0.0;
  std::size_t runs = 0;
  std::size_t censored_runs = 0;
  std::vector<std::string> warnings;
};

/// Mean attack-free run length over independent seeded runs. Each run starts
/// from the zero state, discards `burn_in` steps, then counts steps until the
/// first alarm (censored at `cap`). The per-step rate is measured separately
/// over one continuous stream.
ArlEstimate estimate_arl(const ClosedLoopModel& model, const DetectorConfig& config,
                         std::size_t runs, std::uint64_t seed,
                         std::size_t cap = 1000000, std::size_t burn_in = 50,
                         std::size_t rate_steps = 100000);

struct AlarmFrequency {
  std::size_t alarms = 0;
  std::size_t steps = 0;
  double rate = 0.0;
};

/// Attack-free per-step alarm frequency over one long run.
AlarmFrequency measure_alarm_frequency(const ClosedLoopModel& model,
                                       const DetectorConfig& config, std::size_t steps,
                                       std::uint64_t seed, std::size_t burn_in = 100);

/// Per-step alarm frequency of a detector replayed over a z stream.
AlarmFrequency replay_alarm_frequency(const std::vector<double>& z,
                                      const DetectorConfig& config);

}  // namespace resdet
