#include "resdet/model.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

#include "resdet/errors.hpp"

namespace resdet {
namespace {

void require_shape(const Matrix& A, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (A.rows() != rows || A.cols() != cols) {
    throw std::invalid_argument(std::string(name) + " must be " + std::to_string(rows) +
                                "x" + std::to_string(cols) + ", got " +
                                std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  }
}

}  // namespace

void PlantModel::validate() const {
  const Eigen::Index n = F.rows();
  if (n == 0) throw std::invalid_argument("F must be non-empty");
  require_shape(F, n, n, "F");
  if (G.rows() != n || G.cols() == 0) throw std::invalid_argument("G must have n rows");
  if (C.cols() != n || C.rows() == 0) throw std::invalid_argument("C must have n columns");
  require_shape(R1, n, n, "R1");
  require_shape(R2, C.rows(), C.rows(), "R2");
  require_finite(F, "F");
  require_finite(G, "G");
  require_finite(C, "C");
  require_finite(R1, "R1");
  require_finite(R2, "R2");
  if (!is_symmetric(R1)) throw std::invalid_argument("R1 must be symmetric");
  if (!is_symmetric(R2)) throw std::invalid_argument("R2 must be symmetric");
  const SymmetricEigen r1 = symmetric_eigen(R1);
  if (r1.values.minCoeff() < -1e-9 * std::max(1.0, r1.values.maxCoeff())) {
    throw std::invalid_argument("R1 must be positive semidefinite");
  }
  if (Eigen::LLT<Matrix>(R2).info() != Eigen::Success) {
    throw std::invalid_argument("R2 must be positive definite");
  }
}

double ClosedLoopModel::distance(const Vector& residual) const {
  return sigma_llt_.matrixL().solve(residual).squaredNorm();
}

ClosedLoopModel build_closed_loop(PlantModel plant, Matrix K, std::optional<Matrix> L) {
  plant.validate();
  const Eigen::Index n = plant.states();
  require_shape(K, plant.inputs(), n, "K");
  require_finite(K, "K");

  ClosedLoopModel model;
  model.rho_plant_ = spectral_radius(plant.F);
  model.rho_closed_loop_ = spectral_radius(plant.F + plant.G * K);
  if (model.rho_closed_loop_ >= 1.0) {
    throw ModelError("unstable closed loop: rho[F + GK] = " +
                     std::to_string(model.rho_closed_loop_));
  }

  if (L) {
    require_shape(*L, n, plant.sensors(), "L");
    require_finite(*L, "L");
    model.rho_estimator_ = spectral_radius(plant.F - *L * plant.C);
    if (model.rho_estimator_ >= 1.0) {
      throw ModelError("unstable estimator: rho[F - LC] = " +
                       std::to_string(model.rho_estimator_));
    }
    const Matrix A = plant.F - *L * plant.C;
    model.P_ = solve_discrete_lyapunov(A, *L * plant.R2 * L->transpose() + plant.R1);
    model.L_ = std::move(*L);
    model.gain_source_ = GainSource::supplied;
  } else {
    DareSolution dare = solve_dare(plant.F, plant.C, plant.R1, plant.R2);
    model.P_ = std::move(dare.P);
    model.L_ = std::move(dare.L);
    model.rho_estimator_ = spectral_radius(plant.F - model.L_ * plant.C);
    if (model.rho_estimator_ >= 1.0) {
      throw ModelError("unstable estimator: rho[F - LC] = " +
                       std::to_string(model.rho_estimator_));
    }
    model.gain_source_ = GainSource::riccati;
  }

  Matrix sigma = plant.C * model.P_ * plant.C.transpose() + plant.R2;
  model.sigma_ = 0.5 * (sigma + sigma.transpose());
  model.sigma_llt_.compute(model.sigma_);
  if (model.sigma_llt_.info() != Eigen::Success) {
    throw ModelError("residual covariance is not positive definite");
  }
  model.sigma_half_ = psd_sqrt(model.sigma_);
  model.K_ = std::move(K);
  model.plant_ = std::move(plant);
  return model;
}

LoopState LoopState::zero(const ClosedLoopModel& model) {
  const Eigen::Index n = model.plant().states();
  return {Vector::Zero(n), Vector::Zero(n), 1};
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL));
}

NoiseModel::NoiseModel(const PlantModel& plant, std::uint64_t seed)
    : r1_factor_(sampling_factor(plant.R1)),
      r2_factor_(sampling_factor(plant.R2)),
      seed_(seed),
      engine_(seed) {}

NoiseSample NoiseModel::sample() {
  Vector a(r1_factor_.cols());
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = normal_(engine_);
  Vector b(r2_factor_.cols());
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = normal_(engine_);
  return {r1_factor_ * a, r2_factor_ * b};
}

Vector predicted_output(const ClosedLoopModel& model, const Vector& xhat) {
  Vector out = model.plant().C * xhat;
  return out;
}

Vector measurement(const ClosedLoopModel& model, const LoopState& state,
                   const NoiseSample& noise) {
  return model.plant().C * state.x + noise.eta;
}

Vector error_recursion(const ClosedLoopModel& model, const Vector& e,
                       const NoiseSample& noise, const Vector& delta) {
  const PlantModel& plant = model.plant();
  return (plant.F - model.L() * plant.C) * e - model.L() * noise.eta + noise.v -
         model.L() * delta;
}

StepOutput step(const ClosedLoopModel& model, const LoopState& state,
                const NoiseSample& noise, const Vector& delta) {
  const PlantModel& plant = model.plant();
  const Vector u = model.K() * state.xhat;
  const Vector y = measurement(model, state, noise);
  const Vector ybar = y + delta;
  Vector residual = ybar - predicted_output(model, state.xhat);

  StepOutput out;
  out.next.x = plant.F * state.x + plant.G * u + noise.v;
  out.next.xhat = plant.F * state.xhat + plant.G * u + model.L() * residual;
  out.next.k = state.k + 1;
  out.distance = model.distance(residual);
  out.measurement = y;
  out.residual = std::move(residual);
#ifndef NDEBUG
  const Vector closed_form = error_recursion(model, state.error(), noise, delta);
  assert((out.next.error() - closed_form).norm() <=
         1e-10 * std::max(1.0, closed_form.norm() + state.x.norm()));
#endif
  return out;
}

std::vector<double> simulate_attack_free_distances(const ClosedLoopModel& model,
                                                   std::size_t count,
                                                   std::uint64_t seed,
                                                   std::size_t burn_in) {
  NoiseModel noise(model.plant(), seed);
  LoopState state = LoopState::zero(model);
  const Vector no_attack = Vector::Zero(model.plant().sensors());
  std::vector<double> z;
  z.reserve(count);
  for (std::size_t i = 0; i < burn_in + count; ++i) {
    StepOutput out = step(model, state, noise.sample(), no_attack);
    if (i >= burn_in) z.push_back(out.distance);
    state = std::move(out.next);
  }
  return z;
}

}  // namespace resdet
