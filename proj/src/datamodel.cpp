#include "ebdiff/datamodel.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "ebdiff/errors.hpp"

namespace ebdiff {

GroundTruth sample_ground_truth(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidRange("ground truth dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(dim);
  do {
    for (int m = 0; m < dim; ++m) w(m) = normal(rng);
  } while (w.norm() == 0.0);
  return GroundTruth{w / w.norm()};
}

NodeProfile::NodeProfile(double mu, Matrix regressor_cov, double noise_var)
    : mu_(mu), cov_(std::move(regressor_cov)), noise_var_(noise_var) {
  if (!(mu_ > 0.0) || !std::isfinite(mu_)) throw InvalidRange("step size must be > 0");
  if (!(noise_var_ >= 0.0) || !std::isfinite(noise_var_)) {
    throw InvalidRange("noise variance must be >= 0");
  }
  if (cov_.rows() < 1 || cov_.rows() != cov_.cols()) {
    throw InvalidRange("regressor covariance must be square and non-empty");
  }
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidRange("regressor covariance must be symmetric");
  }
  Eigen::LLT<Matrix> llt(cov_);
  if (llt.info() != Eigen::Success) {
    throw InvalidRange("regressor covariance must be positive definite");
  }
  chol_ = llt.matrixL();
}

NodeProfile NodeProfile::isotropic(double mu, int dim, double regressor_power,
                                   double noise_var) {
  return NodeProfile(mu, regressor_power * Matrix::Identity(dim, dim), noise_var);
}

std::vector<NodeProfile> sample_profiles(int n_nodes, int dim, Interval regressor_power,
                                         Interval noise_db, double mu, std::uint64_t seed) {
  if (n_nodes < 1 || dim < 1) throw InvalidRange("need at least one node and one dimension");
  if (!(regressor_power.lo <= regressor_power.hi) || !(regressor_power.lo > 0.0)) {
    throw InvalidRange("regressor power range must satisfy 0 < lo <= hi");
  }
  if (!(noise_db.lo <= noise_db.hi)) throw InvalidRange("noise dB range must satisfy lo <= hi");
  if (!(mu > 0.0)) throw InvalidRange("step size must be > 0");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](Interval r) { return r.lo + (r.hi - r.lo) * unit(rng); };

  std::vector<NodeProfile> profiles;
  profiles.reserve(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    const double power = draw(regressor_power);
    const double noise = db_to_linear(draw(noise_db));
    profiles.push_back(NodeProfile::isotropic(mu, dim, power, noise));
  }
  return profiles;
}

void DataStream::next_into(const NodeProfile& profile, const GroundTruth& truth,
                           DataSample& out) {
  const int m = profile.dim();
  z_.resize(m);
  for (int j = 0; j < m; ++j) z_(j) = normal_(rng_);
  const double n = normal_(rng_);
  out.u.noalias() = profile.regressor_chol().triangularView<Eigen::Lower>() * z_;
  out.v = std::sqrt(profile.noise_var()) * n;
  out.d = out.u.dot(truth.w_star) + out.v;
}

DataSample DataStream::next(const NodeProfile& profile, const GroundTruth& truth) {
  DataSample s;
  next_into(profile, truth, s);
  return s;
}

void write_profiles(std::ostream& out, const std::vector<NodeProfile>& profiles) {
  out << "node sigma2_u sigma2_v mu\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const auto& p = profiles[k];
    out << (k + 1) << ' ' << p.regressor_power() << ' ' << p.noise_var() << ' ' << p.mu()
        << '\n';
  }
}

}  // namespace ebdiff
