#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's algorithm code.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Kronecker product straight from the index definition.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

inline Vector vec(const Matrix& a) {
  Vector v(a.size());
  Eigen::Index p = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) v(p++) = a(i, j);
  return v;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

struct ScalarSample {
  double u;
  double d;
};

struct ScalarStep {
  double psi[2];
  double w[2];
  int gamma[2];
};

// Two-node, scalar (M = 1) EB-ATC written out line by line. a[l][k] is the
// weight node k gives node l. delta < 0 means plain ATC.
inline std::vector<ScalarStep> two_node_eb_atc(const std::vector<std::vector<ScalarSample>>& data,
                                               const double a[2][2], const double mu[2],
                                               double delta) {
  double w[2] = {0.0, 0.0};
  double psibar[2] = {0.0, 0.0};
  std::vector<ScalarStep> out;
  for (const auto& inst : data) {
    ScalarStep s{};
    for (int k = 0; k < 2; ++k) {
      const double e = inst[k].d - inst[k].u * w[k];
      s.psi[k] = w[k] + mu[k] * e * inst[k].u;
    }
    for (int k = 0; k < 2; ++k) {
      const double gap = s.psi[k] - psibar[k];
      if (delta < 0.0 || gap * gap > delta) {
        psibar[k] = s.psi[k];
        s.gamma[k] = 1;
      } else {
        s.gamma[k] = 0;
      }
    }
    s.w[0] = a[0][0] * s.psi[0] + a[1][0] * psibar[1];
    s.w[1] = a[1][1] * s.psi[1] + a[0][1] * psibar[0];
    w[0] = s.w[0];
    w[1] = s.w[1];
    out.push_back(s);
  }
  return out;
}

}  // namespace oracle
