#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace ebdiff {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct GroundTruth {
  Vector w_star;
  int dim() const noexcept { return static_cast<int>(w_star.size()); }
};

// Standard Gaussian draw normalized to unit Euclidean norm.
GroundTruth sample_ground_truth(int dim, std::uint64_t seed);

// Per-node statistics: step size, regressor covariance and noise variance.
// Construction checks that the covariance is symmetric positive definite and
// caches its Cholesky factor for sampling.
class NodeProfile {
 public:
  NodeProfile(double mu, Matrix regressor_cov, double noise_var);

  static NodeProfile isotropic(double mu, int dim, double regressor_power, double noise_var);

  double mu() const noexcept { return mu_; }
  const Matrix& regressor_cov() const noexcept { return cov_; }
  const Matrix& regressor_chol() const noexcept { return chol_; }
  double noise_var() const noexcept { return noise_var_; }
  int dim() const noexcept { return static_cast<int>(cov_.rows()); }

  // Regressor power when the covariance is a multiple of identity, else the
  // mean eigenvalue (trace / M).
  double regressor_power() const noexcept { return cov_.trace() / dim(); }

  NodeProfile with_mu(double mu) const { return NodeProfile(mu, cov_, noise_var_); }

 private:
  double mu_;
  Matrix cov_;
  Matrix chol_;
  double noise_var_;
};

struct Interval {
  double lo;
  double hi;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// R_u,k = s_k I_M with s_k ~ U[regressor_power], noise variance 10^(x/10) with
// x ~ U[noise_db]. Throws InvalidRange on unordered ranges or non-positive mu.
std::vector<NodeProfile> sample_profiles(int n_nodes, int dim, Interval regressor_power,
                                         Interval noise_db, double mu, std::uint64_t seed);

struct DataSample {
  Vector u;
  double d = 0.0;
  double v = 0.0;
};

// One node's data stream. Each instant draws M standard normals for the
// regressor followed by one for the noise.
class DataStream {
 public:
  explicit DataStream(std::uint64_t seed) : rng_(seed) {}

  DataSample next(const NodeProfile& profile, const GroundTruth& truth);
  void next_into(const NodeProfile& profile, const GroundTruth& truth, DataSample& out);

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Vector z_;
};

// Provenance table: "node sigma2_u sigma2_v mu" rows, 1-indexed nodes.
void write_profiles(std::ostream& out, const std::vector<NodeProfile>& profiles);

}  // namespace ebdiff
