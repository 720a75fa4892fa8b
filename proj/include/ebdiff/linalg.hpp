#pragma once

#include <Eigen/Dense>

namespace ebdiff::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix kron(const Matrix& a, const Matrix& b);

// Column-stacking vectorization.
Vector vec(const Matrix& a);

// Largest |eigenvalue|. Dense eigensolver up to `dense_limit` rows, power
// iteration beyond that.
double spectral_radius(const Matrix& a, Eigen::Index dense_limit = 512);

struct PowerIterationResult {
  double radius = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Two-step power iteration: estimates rho from sqrt(||A^2 x|| / ||x||), which
// also settles when the dominant eigenvalues form a +/- pair. Assumes a real
// dominant spectrum (true for B, a symmetric times a positive definite matrix).
PowerIterationResult power_iteration_radius(const Matrix& a, double rel_tol = 1e-10,
                                            int max_iter = 10000);

double symmetric_lambda_min(const Matrix& a);
double symmetric_lambda_max(const Matrix& a);

}  // namespace ebdiff::linalg
