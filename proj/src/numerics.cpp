#include "resdet/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "resdet/errors.hpp"

namespace resdet {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxGammaIterations = 100000;

// Stirling remainder lgamma(a) - ((a - 1/2) ln a - a + ln(2 pi) / 2), a >= 10.
double stirling_remainder(double a) {
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  return inv *
         (1.0 / 12.0 -
          inv2 * (1.0 / 360.0 -
                  inv2 * (1.0 / 1260.0 -
                          inv2 * (1.0 / 1680.0 -
                                  inv2 * (1.0 / 1188.0 -
                                          inv2 * 691.0 / 360360.0)))));
}

// ln(x^a e^-x / Gamma(a)); the large-a branch avoids cancelling a ln a terms.
double log_gamma_prefactor(double a, double x) {
  if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
  const double t = (x - a) / a;
  return 0.5 * std::log(a / (2.0 * M_PI)) - stirling_remainder(a) -
         a * (t - std::log1p(t));
}

double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxGammaIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(log_gamma_prefactor(a, x));
    }
  }
  throw std::runtime_error("incomplete gamma series failed to converge");
}

double upper_gamma_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(log_gamma_prefactor(a, x)) * h;
    }
  }
  throw std::runtime_error("incomplete gamma continued fraction failed to converge");
}

// d/dx P(a, x)
double lower_gamma_density(double a, double x) {
  if (x <= 0.0) return a < 1.0 ? std::numeric_limits<double>::infinity()
                               : (a == 1.0 ? 1.0 : 0.0);
  return std::exp(log_gamma_prefactor(a, x)) / x;
}

}  // namespace

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("regularized_lower_gamma: a must be positive");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("regularized_lower_gamma: x must be nonnegative");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, lower_gamma_series(a, x));
  return std::clamp(1.0 - upper_gamma_fraction(a, x), 0.0, 1.0);
}

double inverse_regularized_lower_gamma(double a, double q) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("inverse_regularized_lower_gamma: a must be positive");
  }
  if (!(q >= 0.0) || !(q < 1.0)) {
    throw std::domain_error("inverse_regularized_lower_gamma: q must lie in [0, 1)");
  }
  if (q == 0.0) return 0.0;

  double lo = 0.0;
  double hi = a + 20.0 * std::sqrt(a) + 100.0;
  while (regularized_lower_gamma(a, hi) < q) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::domain_error("inverse gamma: q too close to 1");
  }

  double x = std::clamp(a, lo, hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double f = regularized_lower_gamma(a, x) - q;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double slope = lower_gamma_density(a, x);
    double next = x - f / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 4.0 * kEps * std::max(x, kTiny) ||
        hi - lo <= 4.0 * kEps * std::max(hi, kTiny)) {
      return next;
    }
    x = next;
  }
  return x;
}

bool is_symmetric(const Matrix& S, double relative_tolerance) {
  if (S.rows() != S.cols()) return false;
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  return (S - S.transpose()).cwiseAbs().maxCoeff() <= relative_tolerance * scale;
}

void require_finite(const Matrix& A, const char* name) {
  if (!A.allFinite()) {
    throw std::invalid_argument(std::string(name) + " has non-finite entries");
  }
}

SymmetricEigen symmetric_eigen(const Matrix& S) {
  if (S.rows() != S.cols()) {
    throw std::invalid_argument("symmetric_eigen: matrix is not square");
  }
  if (!is_symmetric(S)) {
    throw std::invalid_argument("symmetric_eigen: matrix is not symmetric");
  }
  const Eigen::Index n = S.rows();
  Matrix A = 0.5 * (S + S.transpose());
  Matrix V = Matrix::Identity(n, n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    }
    if (off == 0.0) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double app = A(p, p);
        const double aqq = A(q, q);
        // Negligible against both diagonal entries: drop it.
        if (sweep > 3 && std::abs(app) + 100.0 * std::abs(apq) == std::abs(app) &&
            std::abs(aqq) + 100.0 * std::abs(apq) == std::abs(aqq)) {
          A(p, q) = A(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = A(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return A(i, i) > A(j, j); });

  SymmetricEigen result{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    result.values(i) = A(order[i], order[i]);
    result.vectors.col(i) = V.col(order[i]);
  }
  return result;
}

Eigenpair max_eigenpair(const Matrix& S) {
  if (S.size() == 0) throw std::invalid_argument("max_eigenpair: empty matrix");
  const SymmetricEigen eig = symmetric_eigen(S);
  Eigenpair pair{eig.values(0), eig.vectors.col(0).normalized()};
  for (Eigen::Index i = 0; i < pair.vector.size(); ++i) {
    if (std::abs(pair.vector(i)) > 1e-12) {
      if (pair.vector(i) < 0.0) pair.vector = -pair.vector;
      break;
    }
  }
  return pair;
}

double spectral_radius(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("spectral_radius: matrix is not square");
  }
  if (A.size() == 0) return 0.0;
  require_finite(A, "spectral_radius input");
  Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spectral_radius: eigenvalue iteration failed");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix psd_sqrt(const Matrix& S) {
  const SymmetricEigen eig = symmetric_eigen(S);
  const double top = std::max(0.0, eig.values.maxCoeff());
  Vector roots(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double lambda = eig.values(i);
    if (lambda < -1e-9 * std::max(top, 1e-300)) {
      throw std::invalid_argument("psd_sqrt: matrix is indefinite");
    }
    roots(i) = std::sqrt(std::max(lambda, 0.0));
  }
  Matrix X = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (X + X.transpose());
}

Matrix cholesky_lower(const Matrix& S) {
  if (!is_symmetric(S)) throw std::invalid_argument("cholesky_lower: matrix is not symmetric");
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("cholesky_lower: matrix is not positive definite");
  }
  return llt.matrixL();
}

Matrix sampling_factor(const Matrix& S) {
  if (!is_symmetric(S)) throw std::invalid_argument("sampling_factor: matrix is not symmetric");
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  return psd_sqrt(S);
}

double dare_residual(const Matrix& F, const Matrix& C, const Matrix& R1,
                     const Matrix& R2, const Matrix& P) {
  const Matrix S = C * P * C.transpose() + R2;
  const Matrix FPCt = F * P * C.transpose();
  const Matrix rhs = F * P * F.transpose() -
                     FPCt * S.llt().solve(FPCt.transpose()) + R1;
  return (rhs - P).norm();
}

DareSolution solve_dare(const Matrix& F, const Matrix& C, const Matrix& R1,
                        const Matrix& R2) {
  const Eigen::Index n = F.rows();
  if (F.cols() != n || C.cols() != n || R1.rows() != n || R1.cols() != n ||
      R2.rows() != C.rows() || R2.cols() != C.rows()) {
    throw std::invalid_argument("solve_dare: inconsistent dimensions");
  }
  if (Eigen::LLT<Matrix>(R2).info() != Eigen::Success) {
    throw std::invalid_argument("solve_dare: R2 must be positive definite");
  }

  constexpr int kMaxIterations = 100000;
  Matrix P = R1;
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    const Matrix S = C * P * C.transpose() + R2;
    const Matrix FPCt = F * P * C.transpose();
    Matrix next = F * P * F.transpose() -
                  FPCt * S.llt().solve(FPCt.transpose()) + R1;
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) {
      throw ModelError("non-detectable or ill-conditioned model: Riccati iteration diverged");
    }
    const double change = (next - P).norm();
    P = std::move(next);
    if (change <= 4.0 * kEps * std::max(1.0, P.norm())) {
      const Matrix Sigma = C * P * C.transpose() + R2;
      Matrix L = Sigma.llt().solve(C * P * F.transpose()).transpose();
      if (spectral_radius(F - L * C) >= 1.0) {
        throw ModelError("non-detectable or ill-conditioned model: unstable Riccati gain");
      }
      return {P, L, iter};
    }
  }
  throw ModelError("non-detectable or ill-conditioned model: Riccati iteration limit exceeded");
}

Matrix solve_discrete_lyapunov(const Matrix& A, const Matrix& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("solve_discrete_lyapunov: inconsistent dimensions");
  }
  if (spectral_radius(A) >= 1.0) {
    throw ModelError("Lyapunov equation has no stationary solution: rho[A] >= 1");
  }
  // (I - A (x) A) vec(P) = vec(Q), column-major vec.
  const Eigen::Index nn = n * n;
  Matrix system = Matrix::Identity(nn, nn);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system.block(i * n, j * n, n, n) -= A(i, j) * A;
    }
  }
  const Vector vecQ = Eigen::Map<const Vector>(Q.data(), nn);
  const Vector vecP = system.partialPivLu().solve(vecQ);
  Matrix P = Eigen::Map<const Matrix>(vecP.data(), n, n);
  if (!P.allFinite()) throw ModelError("Lyapunov solve produced non-finite entries");
  return 0.5 * (P + P.transpose());
}

}  // namespace resdet
