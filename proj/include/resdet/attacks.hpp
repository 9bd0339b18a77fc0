#pragma once

#include <optional>
#include <string_view>

#include "resdet/detectors.hpp"
#include "resdet/model.hpp"

namespace resdet {

enum class AttackKind { none, chi2, cusum, windowed_static, windowed_pulse };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

/// The zero-alarm attack matched to a detector kind.
AttackKind matching_attack(DetectorKind kind);

/// Per-step offset rule for the static windowed attack.
enum class WindowedMagnitude {
  /// |offset|^2 = beta / ell, so ell attacked steps sum to exactly beta.
  budget,
  /// offset = beta_bar / ell with |beta_bar|^2 = beta (window sum beta / ell).
  literal,
};

/// How the static windowed attack handles pre-attack values still in the
/// window.
enum class WindowedTransient { static_offset, greedy_saturating };

/// First attacked CUSUM step: sqrt(tau) offset, or the offset that lands the
/// statistic exactly on tau given S_{k*-1}.
enum class CusumFirstStep { threshold_step, exact_saturating };

/// Zero-alarm sensor attack: from k_star on, the attacker replaces the
/// residual by Sigma^{1/2} psi_k, where psi_k is the detector-specific offset
/// along `direction`.
struct AttackPlan {
  AttackKind kind = AttackKind::none;
  long k_star = 1;
  Vector direction;  ///< unit p-vector
  DetectorConfig detector;
  WindowedMagnitude magnitude_rule = WindowedMagnitude::budget;
  WindowedTransient transient = WindowedTransient::static_offset;
  CusumFirstStep cusum_first_step = CusumFirstStep::threshold_step;
  /// When set, psi_k equals this vector on every attacked step instead of the
  /// saturating offset (e.g. the all-ones comparison attack). Its squared
  /// norm must fit in the per-step budget.
  std::optional<Vector> fixed_offset;
  /// Relative back-off from the saturating budget so rounding in the
  /// residual cannot trip a strict threshold.
  double margin = 5e-11;

  void validate() const;
};

/// Builds a validated plan targeting `detector` with the matching attack.
AttackPlan make_attack_plan(const DetectorConfig& detector, long k_star,
                            const Vector& direction);

/// M = (I - F - GK)^-1 G K (I - F)^-1 L Sigma^{1/2}, the map from a static
/// residual offset to the steady-state mean state.
///
/// Throws ModelError("stability precondition violated") when rho[F] >= 1,
/// rho[F + GK] >= 1 or either system is numerically singular.
Matrix compute_M(const Matrix& F, const Matrix& G, const Matrix& K, const Matrix& L,
                 const Matrix& sigma_half);
Matrix compute_M(const ClosedLoopModel& model);

struct WorstDirection {
  Vector direction;  ///< unit eigenvector of M^T M for the largest eigenvalue
  double lambda = 0.0;
};

WorstDirection worst_direction(const Matrix& M);

struct DeviationBound {
  double gamma = 0.0;
  AttackKind kind = AttackKind::none;
  double magnitude = 0.0;
  Vector direction;
};

/// Per-step squared offset the zero-alarm attack may spend: alpha, b, beta/ell
/// (budget rule) or beta/ell^2 (literal rule).
double attack_budget(const DetectorConfig& detector,
                     WindowedMagnitude rule = WindowedMagnitude::budget);

/// gamma = |M * sqrt(budget) * direction| for a unit direction.
DeviationBound gamma_bound(const Matrix& M, const DetectorConfig& detector,
                           const Vector& direction,
                           WindowedMagnitude rule = WindowedMagnitude::budget);

/// Steady-state deviation predicted for a concrete plan: the saturating
/// offset, the fixed offset when given, or the period-mean offset
/// sqrt(beta)/ell of the pulse attack.
DeviationBound predicted_deviation(const Matrix& M, const AttackPlan& plan);

/// Offset psi_k the plan places in the residual at step k (k >= k_star).
Vector attack_offset(const AttackPlan& plan, const Detector& detector, long k);

/// delta_k = C xhat_k - y_k + Sigma^{1/2} psi_k, zero before k_star.
Vector synthesize_attack(const AttackPlan& plan, const ClosedLoopModel& model,
                         const LoopState& state, const NoiseSample& noise,
                         const Detector& detector);

}  // namespace resdet
