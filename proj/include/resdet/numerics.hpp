#pragma once

#include <Eigen/Core>

namespace resdet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Regularized lower incomplete gamma function P(a, x).
///
/// Series expansion below x = a + 1, Lentz continued fraction for the upper
/// tail otherwise. Throws std::domain_error for a <= 0 or x < 0.
double regularized_lower_gamma(double a, double x);

/// Inverse of P(a, .) in its second argument: returns x with P(a, x) = q.
/// Newton iteration with a bisection safeguard. Requires 0 <= q < 1.
double inverse_regularized_lower_gamma(double a, double q);

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending
/// and eigenvectors stored column-wise in matching order.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi eigensolver. Throws std::invalid_argument when S is not
/// square or not symmetric to 1e-9 relative.
SymmetricEigen symmetric_eigen(const Matrix& S);

struct Eigenpair {
  double value = 0.0;
  Vector vector;
};

/// Largest eigenvalue of a symmetric PSD matrix and its unit eigenvector.
/// The first component with magnitude above 1e-12 is made positive.
Eigenpair max_eigenpair(const Matrix& S);

/// Largest eigenvalue magnitude of a square matrix.
double spectral_radius(const Matrix& A);

/// Symmetric square root X of a PSD matrix (X * X = S). Eigenvalues down to
/// -1e-9 * max eigenvalue are treated as zero; anything below is rejected.
Matrix psd_sqrt(const Matrix& S);

/// Lower Cholesky factor of a positive definite matrix.
Matrix cholesky_lower(const Matrix& S);

/// Factor W with W * W^T = S for a PSD matrix: Cholesky when S is definite,
/// the symmetric square root otherwise.
Matrix sampling_factor(const Matrix& S);

bool is_symmetric(const Matrix& S, double relative_tolerance = 1e-9);

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const Matrix& A, const char* name);

struct DareSolution {
  Matrix P;  ///< steady-state a-priori error covariance
  Matrix L;  ///< predictor-form Kalman gain F P C^T (C P C^T + R2)^-1
  int iterations = 0;
};

/// Filtering DARE  P = F P F^T - F P C^T (C P C^T + R2)^-1 C P F^T + R1,
/// solved by fixed-point iteration from P = R1.
///
/// Throws ModelError when the iteration diverges, exceeds 1e5 iterations,
/// or produces a gain with rho[F - L C] >= 1.
DareSolution solve_dare(const Matrix& F, const Matrix& C, const Matrix& R1,
                        const Matrix& R2);

/// Frobenius norm of the DARE residual at P.
double dare_residual(const Matrix& F, const Matrix& C, const Matrix& R1,
                     const Matrix& R2, const Matrix& P);

/// Solves P = A P A^T + Q for a Schur-stable A.
Matrix solve_discrete_lyapunov(const Matrix& A, const Matrix& Q);

}  // namespace resdet
