#include "ebdiff/linalg.hpp"

#include <cmath>

namespace ebdiff::linalg {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

double spectral_radius(const Matrix& a, Eigen::Index dense_limit) {
  if (a.size() == 0) return 0.0;
  if (a.rows() <= dense_limit) {
    Eigen::EigenSolver<Matrix> eig(a, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
  }
  return power_iteration_radius(a).radius;
}

PowerIterationResult power_iteration_radius(const Matrix& a, double rel_tol, int max_iter) {
  PowerIterationResult result;
  Vector x = Vector::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  // Perturb away from symmetric starting vectors.
  for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += 1e-3 * std::sin(1.0 + j);
  x.normalize();
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector y = a * x;
    Vector z = a * y;
    const double nz = z.norm();
    result.iterations = it;
    if (nz == 0.0) {
      result.radius = 0.0;
      result.converged = true;
      return result;
    }
    const double est = std::sqrt(nz);
    result.radius = est;
    if (prev >= 0.0 && std::abs(est - prev) <= rel_tol * est) {
      result.converged = true;
      return result;
    }
    prev = est;
    x = z / nz;
  }
  return result;
}

double symmetric_lambda_min(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double symmetric_lambda_max(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace ebdiff::linalg
