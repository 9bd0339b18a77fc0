#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Cholesky>

#include "resdet/numerics.hpp"

namespace resdet {

/// Stochastic discrete-time LTI plant
///   x+ = F x + G u + v,   y = C x + eta,
/// with v ~ N(0, R1) and eta ~ N(0, R2).
struct PlantModel {
  Matrix F;   ///< n x n
  Matrix G;   ///< n x m
  Matrix C;   ///< p x n
  Matrix R1;  ///< n x n, PSD
  Matrix R2;  ///< p x p, PD

  Eigen::Index states() const { return F.rows(); }
  Eigen::Index inputs() const { return G.cols(); }
  Eigen::Index sensors() const { return C.rows(); }

  /// Checks dimensions, finiteness, symmetry, R1 PSD and R2 PD.
  /// Throws std::invalid_argument on the first violation.
  void validate() const;
};

enum class GainSource { riccati, supplied };

/// Plant closed with u = K xhat and the steady-state predictor
///   xhat+ = F xhat + G u + L (ybar - C xhat).
///
/// Immutable once built; share freely across threads.
class ClosedLoopModel {
 public:
  const PlantModel& plant() const { return plant_; }
  const Matrix& K() const { return K_; }
  const Matrix& L() const { return L_; }
  /// Steady-state estimation error covariance E[e e^T].
  const Matrix& P() const { return P_; }
  /// Residual covariance C P C^T + R2.
  const Matrix& sigma() const { return sigma_; }
  const Matrix& sigma_half() const { return sigma_half_; }
  GainSource gain_source() const { return gain_source_; }

  double rho_plant() const { return rho_plant_; }
  double rho_closed_loop() const { return rho_closed_loop_; }
  double rho_estimator() const { return rho_estimator_; }

  /// Distance measure r^T Sigma^-1 r.
  double distance(const Vector& residual) const;

  friend ClosedLoopModel build_closed_loop(PlantModel plant, Matrix K,
                                           std::optional<Matrix> L);

 private:
  ClosedLoopModel() = default;

  PlantModel plant_;
  Matrix K_;
  Matrix L_;
  Matrix P_;
  Matrix sigma_;
  Matrix sigma_half_;
  Eigen::LLT<Matrix> sigma_llt_;
  GainSource gain_source_ = GainSource::riccati;
  double rho_plant_ = 0.0;
  double rho_closed_loop_ = 0.0;
  double rho_estimator_ = 0.0;
};

/// Assembles the closed loop. Without L the Kalman gain comes from the DARE;
/// with L, P solves P = (F - LC) P (F - LC)^T + L R2 L^T + R1 so that Sigma
/// matches the gain actually in use.
///
/// Throws ModelError("unstable closed loop") when rho[F + GK] >= 1 and
/// ModelError("unstable estimator") when rho[F - LC] >= 1.
ClosedLoopModel build_closed_loop(PlantModel plant, Matrix K,
                                  std::optional<Matrix> L = std::nullopt);

/// True state, estimate and step index. The estimation error is derived so
/// e == x - xhat holds by construction.
struct LoopState {
  Vector x;
  Vector xhat;
  long k = 1;

  Vector error() const { return x - xhat; }

  static LoopState zero(const ClosedLoopModel& model);
};

struct NoiseSample {
  Vector v;    ///< process noise, n
  Vector eta;  ///< measurement noise, p
};

/// Seeded Gaussian noise source for one simulation run. The same seed always
/// reproduces the same stream.
class NoiseModel {
 public:
  NoiseModel(const PlantModel& plant, std::uint64_t seed);

  NoiseSample sample();
  std::uint64_t seed() const { return seed_; }

 private:
  Matrix r1_factor_;
  Matrix r2_factor_;
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Seed of the independent substream `stream` derived from `seed`
/// (SplitMix64 mixing).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

struct StepOutput {
  LoopState next;
  Vector measurement;  ///< y = C x + eta (before the attack)
  Vector residual;     ///< r = ybar - C xhat
  double distance = 0.0;
};

/// C xhat. Attack synthesis and the estimator share this evaluation so both
/// see bit-identical predictions.
Vector predicted_output(const ClosedLoopModel& model, const Vector& xhat);

/// y = C x + eta.
Vector measurement(const ClosedLoopModel& model, const LoopState& state,
                   const NoiseSample& noise);

/// Advances the attacked loop by one step. `delta` is the additive sensor
/// attack (zero vector for the attack-free loop).
StepOutput step(const ClosedLoopModel& model, const LoopState& state,
                const NoiseSample& noise, const Vector& delta);

/// Closed form (F - LC) e - L eta + v - L delta of the error update.
Vector error_recursion(const ClosedLoopModel& model, const Vector& e,
                       const NoiseSample& noise, const Vector& delta);

/// Attack-free distance measures z_k for `count` steps after `burn_in`
/// discarded steps, starting from the zero state.
std::vector<double> simulate_attack_free_distances(const ClosedLoopModel& model,
                                                   std::size_t count,
                                                   std::uint64_t seed,
                                                   std::size_t burn_in = 100);

}  // namespace resdet
