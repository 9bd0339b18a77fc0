#include "resdet/attacks.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "resdet/errors.hpp"

namespace resdet {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none:
      return "none";
    case AttackKind::chi2:
      return "chi2";
    case AttackKind::cusum:
      return "cusum";
    case AttackKind::windowed_static:
      return "windowed-static";
    case AttackKind::windowed_pulse:
      return "windowed-pulse";
  }
  return "unknown";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "none") return AttackKind::none;
  if (name == "chi2") return AttackKind::chi2;
  if (name == "cusum") return AttackKind::cusum;
  if (name == "windowed-static" || name == "windowed") return AttackKind::windowed_static;
  if (name == "windowed-pulse") return AttackKind::windowed_pulse;
  throw std::invalid_argument("unknown attack kind '" + std::string(name) + "'");
}

AttackKind matching_attack(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::chi2:
      return AttackKind::chi2;
    case DetectorKind::windowed:
      return AttackKind::windowed_static;
    case DetectorKind::cusum:
      return AttackKind::cusum;
  }
  return AttackKind::none;
}

namespace {

bool targets(AttackKind attack, DetectorKind detector) {
  switch (attack) {
    case AttackKind::none:
      return true;
    case AttackKind::chi2:
      return detector == DetectorKind::chi2;
    case AttackKind::cusum:
      return detector == DetectorKind::cusum;
    case AttackKind::windowed_static:
    case AttackKind::windowed_pulse:
      return detector == DetectorKind::windowed;
  }
  return false;
}

void require_unit(const Vector& direction) {
  if (direction.size() == 0 || std::abs(direction.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("attack direction must have unit norm");
  }
}

}  // namespace

void AttackPlan::validate() const {
  if (kind == AttackKind::none) return;
  if (k_star < 1) throw std::invalid_argument("attack start k* must be >= 1");
  detector.validate();
  if (!targets(kind, detector.kind)) {
    throw std::invalid_argument("attack kind '" + std::string(to_string(kind)) +
                                "' does not target a " +
                                std::string(to_string(detector.kind)) + " detector");
  }
  if (!(margin >= 0.0 && margin < 1e-3)) {
    throw std::invalid_argument("attack margin must lie in [0, 1e-3)");
  }
  if (fixed_offset) {
    if (kind == AttackKind::windowed_pulse) {
      throw std::invalid_argument("pulse attacks do not accept a fixed offset");
    }
    const double budget = attack_budget(detector);
    if (fixed_offset->squaredNorm() > budget * (1.0 + 1e-12)) {
      throw std::invalid_argument("fixed attack offset exceeds the zero-alarm budget");
    }
    if (fixed_offset->size() == 0) throw std::invalid_argument("empty fixed attack offset");
    return;
  }
  require_unit(direction);
}

AttackPlan make_attack_plan(const DetectorConfig& detector, long k_star,
                            const Vector& direction) {
  AttackPlan plan;
  plan.kind = matching_attack(detector.kind);
  plan.k_star = k_star;
  plan.direction = direction;
  plan.detector = detector;
  plan.validate();
  return plan;
}

Matrix compute_M(const Matrix& F, const Matrix& G, const Matrix& K, const Matrix& L,
                 const Matrix& sigma_half) {
  const Eigen::Index n = F.rows();
  if (F.cols() != n || G.rows() != n || K.rows() != G.cols() || K.cols() != n ||
      L.rows() != n || L.cols() != sigma_half.rows() ||
      sigma_half.rows() != sigma_half.cols()) {
    throw std::invalid_argument("compute_M: inconsistent dimensions");
  }
  const Matrix GK = G * K;
  if (spectral_radius(F) >= 1.0 || spectral_radius(F + GK) >= 1.0) {
    throw ModelError("stability precondition violated: need rho[F] < 1 and rho[F + GK] < 1");
  }
  const Matrix I = Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> plant_lu(I - F);
  Eigen::FullPivLU<Matrix> loop_lu(I - F - GK);
  if (!plant_lu.isInvertible() || !loop_lu.isInvertible()) {
    throw ModelError("stability precondition violated: singular steady-state map");
  }
  const Matrix error_map = plant_lu.solve(L * sigma_half);
  Matrix M = loop_lu.solve(GK * error_map);
  if (!M.allFinite()) throw ModelError("stability precondition violated: non-finite M");
  return M;
}

Matrix compute_M(const ClosedLoopModel& model) {
  const PlantModel& plant = model.plant();
  return compute_M(plant.F, plant.G, model.K(), model.L(), model.sigma_half());
}

WorstDirection worst_direction(const Matrix& M) {
  require_finite(M, "M");
  const Matrix gram = M.transpose() * M;
  const Eigenpair top = max_eigenpair(0.5 * (gram + gram.transpose()));
  return {top.vector, top.value};
}

double attack_budget(const DetectorConfig& detector, WindowedMagnitude rule) {
  detector.validate();
  switch (detector.kind) {
    case DetectorKind::chi2:
      return detector.threshold;
    case DetectorKind::cusum:
      return detector.bias;
    case DetectorKind::windowed: {
      const double ell = detector.window;
      return rule == WindowedMagnitude::budget ? detector.threshold / ell
                                               : detector.threshold / (ell * ell);
    }
  }
  return 0.0;
}

DeviationBound gamma_bound(const Matrix& M, const DetectorConfig& detector,
                           const Vector& direction, WindowedMagnitude rule) {
  require_unit(direction);
  if (direction.size() != M.cols()) {
    throw std::invalid_argument("gamma_bound: direction length must equal sensor count");
  }
  DeviationBound bound;
  bound.kind = matching_attack(detector.kind);
  bound.magnitude = std::sqrt(attack_budget(detector, rule));
  bound.direction = direction;
  bound.gamma = (M * (bound.magnitude * direction)).norm();
  return bound;
}

DeviationBound predicted_deviation(const Matrix& M, const AttackPlan& plan) {
  plan.validate();
  DeviationBound bound;
  bound.kind = plan.kind;
  if (plan.kind == AttackKind::none) return bound;
  if (plan.fixed_offset) {
    bound.magnitude = plan.fixed_offset->norm();
    bound.direction = bound.magnitude > 0.0 ? Vector(*plan.fixed_offset / bound.magnitude)
                                            : Vector(*plan.fixed_offset);
    bound.gamma = (M * *plan.fixed_offset).norm();
    return bound;
  }
  if (plan.kind == AttackKind::windowed_pulse) {
    const double ell = plan.detector.window;
    bound.magnitude = std::sqrt(plan.detector.threshold) / ell;
    bound.direction = plan.direction;
    bound.gamma = (M * (bound.magnitude * plan.direction)).norm();
    return bound;
  }
  bound = gamma_bound(M, plan.detector, plan.direction, plan.magnitude_rule);
  bound.kind = plan.kind;
  return bound;
}

Vector attack_offset(const AttackPlan& plan, const Detector& detector, long k) {
  if (plan.fixed_offset) return *plan.fixed_offset;
  const double keep = 1.0 - plan.margin;
  const DetectorConfig& cfg = plan.detector;
  auto along = [&](double squared) { return Vector(std::sqrt(std::max(0.0, squared)) * plan.direction); };

  switch (plan.kind) {
    case AttackKind::none:
      return Vector::Zero(plan.direction.size());
    case AttackKind::chi2:
      return along(cfg.threshold * keep);
    case AttackKind::windowed_static: {
      if (plan.transient == WindowedTransient::greedy_saturating) {
        const auto* windowed = detector.as<WindowedChiSquaredDetector>();
        if (windowed == nullptr) {
          throw std::invalid_argument("greedy windowed attack needs a windowed detector");
        }
        return along(cfg.threshold * keep - windowed->retained_sum());
      }
      return along(attack_budget(cfg, plan.magnitude_rule) * keep);
    }
    case AttackKind::windowed_pulse:
      if ((k - plan.k_star) % cfg.window == 0) return along(cfg.threshold * keep);
      return Vector::Zero(plan.direction.size());
    case AttackKind::cusum: {
      const double previous = detector.statistic();
      if (plan.cusum_first_step == CusumFirstStep::exact_saturating) {
        return along(cfg.threshold * keep + cfg.bias - previous);
      }
      if (k == plan.k_star) return along(cfg.threshold * keep);
      return along(cfg.bias);
    }
  }
  return Vector::Zero(plan.direction.size());
}

Vector synthesize_attack(const AttackPlan& plan, const ClosedLoopModel& model,
                         const LoopState& state, const NoiseSample& noise,
                         const Detector& detector) {
  const Eigen::Index p = model.plant().sensors();
  if (plan.kind == AttackKind::none || state.k < plan.k_star) return Vector::Zero(p);
  const Vector psi = attack_offset(plan, detector, state.k);
  if (psi.size() != p) {
    throw std::invalid_argument("attack offset length must equal sensor count");
  }
  // Forge ybar = C xhat + Sigma^{1/2} psi; the residual then equals
  // Sigma^{1/2} psi up to one rounding of the forged value.
  const Vector forged = predicted_output(model, state.xhat) + model.sigma_half() * psi;
  return forged - measurement(model, state, noise);
}

}  // namespace resdet
