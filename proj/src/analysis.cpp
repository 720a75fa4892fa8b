#include "ebdiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "ebdiff/errors.hpp"
#include "ebdiff/linalg.hpp"

namespace ebdiff {

namespace {

constexpr double kHalfSqrt2 = 0.70710678118654752440;

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

const Matrix& AnalysisWorkspace::F_big() const {
  if (!has_F()) {
    throw DimensionCapExceeded("F needs MN <= " + std::to_string(f_cap_) + ", have MN = " +
                               std::to_string(extended_dim()));
  }
  return f_big_;
}

AnalysisWorkspace build_workspace(const CombinationMatrix& weights,
                                  const std::vector<NodeProfile>& profiles, int f_cap) {
  const int n = static_cast<int>(profiles.size());
  if (n < 1 || weights.rows() != n || weights.cols() != n) {
    throw ShapeMismatch("combination matrix and profiles disagree on N");
  }
  const int m = profiles.front().dim();
  const int mn = m * n;

  AnalysisWorkspace ws;
  ws.nodes_ = n;
  ws.dim_ = m;
  ws.f_cap_ = f_cap;

  const Matrix eye_m = Matrix::Identity(m, m);
  Matrix c = weights;
  c.diagonal().setZero();
  ws.a_ext_ = linalg::kron(weights, eye_m);
  ws.c_ext_ = linalg::kron(c, eye_m);

  ws.m_ext_ = Matrix::Zero(mn, mn);
  ws.r_ext_ = Matrix::Zero(mn, mn);
  ws.s_ext_ = Matrix::Zero(mn, mn);
  for (int k = 0; k < n; ++k) {
    const auto& p = profiles[k];
    if (p.dim() != m) throw ShapeMismatch("profiles disagree on dimension");
    ws.m_ext_.block(k * m, k * m, m, m) = p.mu() * eye_m;
    ws.r_ext_.block(k * m, k * m, m, m) = p.regressor_cov();
    ws.s_ext_.block(k * m, k * m, m, m) = p.noise_var() * p.regressor_cov();
  }
  ws.b_mean_ = ws.a_ext_.transpose() * (Matrix::Identity(mn, mn) - ws.m_ext_ * ws.r_ext_);

  if (mn <= f_cap) {
    const Matrix bt = ws.b_mean_.transpose();
    ws.f_big_ = 2.0 * linalg::kron(bt, bt);
  }
  return ws;
}

double block_max_norm(const Matrix& x, int block_size) {
  if (block_size < 1 || x.rows() != x.cols() || x.rows() % block_size != 0) {
    throw UnsupportedStructure("matrix is not square with whole M x M blocks");
  }
  const Eigen::Index blocks = x.rows() / block_size;
  double norm = 0.0;
  for (Eigen::Index p = 0; p < blocks; ++p) {
    for (Eigen::Index q = 0; q < blocks; ++q) {
      const auto blk = x.block(p * block_size, q * block_size, block_size, block_size);
      if (p != q) {
        if (!blk.isZero(0.0)) throw UnsupportedStructure("matrix is not block diagonal");
        continue;
      }
      if ((blk - blk.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw UnsupportedStructure("diagonal block " + std::to_string(p + 1) + " is not symmetric");
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(blk), Eigen::EigenvaluesOnly);
      norm = std::max(norm, eig.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
  return norm;
}

double block_max_vector_norm(const Vector& x, int block_size) {
  double norm = 0.0;
  for (Eigen::Index p = 0; p + block_size <= x.size(); p += block_size) {
    norm = std::max(norm, x.segment(p, block_size).norm());
  }
  return norm;
}

MeanStability mean_stability_condition(const NodeProfile& profile) {
  const double bound = 2.0 / linalg::symmetric_lambda_max(profile.regressor_cov());
  return {bound, profile.mu() < bound};
}

MsdStepInterval msd_step_size_interval(const NodeProfile& profile) {
  const double lmin = linalg::symmetric_lambda_min(profile.regressor_cov());
  const double lmax = linalg::symmetric_lambda_max(profile.regressor_cov());
  const double ratio = (2.0 + std::sqrt(2.0)) / (2.0 - std::sqrt(2.0));
  return {(1.0 - kHalfSqrt2) / lmin, (1.0 + kHalfSqrt2) / lmax, lmax < ratio * lmin};
}

double combination_alpha(const CombinationMatrix& weights) {
  return (1.0 - weights.diagonal().array()).maxCoeff();
}

double mean_beta(const std::vector<NodeProfile>& profiles) {
  double beta = 0.0;
  for (const auto& p : profiles) {
    const Matrix blk = Matrix::Identity(p.dim(), p.dim()) - p.mu() * p.regressor_cov();
    beta = std::max(beta, block_max_norm(blk, p.dim()));
  }
  return beta;
}

std::vector<double> gap_bounds(const std::vector<TriggerPolicy>& policies) {
  std::vector<double> out;
  out.reserve(policies.size());
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const auto& p = policies[k];
    if (!p.positive_definite()) {
      throw SingularWeighting("trigger weighting of node " + std::to_string(k + 1) +
                              " has lambda_min <= 0");
    }
    out.push_back(std::sqrt(p.delta_sup() / p.lambda_min()));
  }
  return out;
}

double mean_error_bound(const CombinationMatrix& weights, const std::vector<NodeProfile>& profiles,
                        const std::vector<TriggerPolicy>& policies) {
  const double beta = mean_beta(profiles);
  if (!(beta < 1.0)) {
    throw UnstableConfiguration("||I - M R_u||_b,inf = " + fmt(beta) + " >= 1");
  }
  const auto gaps = gap_bounds(policies);
  const double worst = gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
  return combination_alpha(weights) / (1.0 - beta) * worst;
}

double delta_total(const std::vector<TriggerPolicy>& policies) {
  double sum = 0.0;
  for (double g : gap_bounds(policies)) sum += g;
  return sum;
}

MsdBoundVectors msd_bound_vectors(const AnalysisWorkspace& ws, double delta_sum) {
  if (ws.extended_dim() > ws.f_cap()) {
    throw DimensionCapExceeded("MSD bound vectors need MN <= " + std::to_string(ws.f_cap()));
  }
  const Matrix& a = ws.A_ext();
  const Matrix& c = ws.C_ext();
  const Matrix& mu = ws.M_ext();
  MsdBoundVectors f;
  f.f1 = linalg::vec(a.transpose() * mu * ws.S_ext() * mu * a);
  f.f2 = 2.0 * delta_sum * linalg::vec(c.transpose() * c);
  return f;
}

Matrix empirical_trigger_matrix(const std::vector<double>& trigger_rates, int dim) {
  const int n = static_cast<int>(trigger_rates.size());
  Matrix g = Matrix::Zero(n * dim, n * dim);
  for (int k = 0; k < n; ++k) {
    const double r = trigger_rates[k];
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidRange("trigger rates must lie in [0, 1]");
    g.block(k * dim, k * dim, dim, dim).diagonal().setConstant(r - 1.0);
  }
  return g;
}

MsdBound msd_upper_bound(const AnalysisWorkspace& ws, const MsdBoundVectors& f,
                         const Matrix& trigger_matrix) {
  const Matrix& big = ws.F_big();
  const int mn = ws.extended_dim();
  if (trigger_matrix.rows() != mn || trigger_matrix.cols() != mn) {
    throw ShapeMismatch("trigger matrix must be MN x MN");
  }
  MsdBound out;
  out.rho_F = linalg::spectral_radius(big);
  if (!(out.rho_F < 1.0)) throw UnstableF("rho(F) = " + fmt(out.rho_F) + " >= 1");

  const Matrix& a = ws.A_ext();
  const Matrix& mu = ws.M_ext();
  const Vector f3 =
      2.0 * linalg::vec(ws.C_ext().transpose() * trigger_matrix * mu * ws.S_ext() * mu * a);

  // x^T (I - F)^{-1} vec(I) = x^T z with (I - F) z = vec(I).
  const Eigen::Index dd = big.rows();
  const Vector vec_eye = linalg::vec(Matrix::Identity(mn, mn));
  const Matrix lhs = Matrix::Identity(dd, dd) - big;
  const Vector z = lhs.partialPivLu().solve(vec_eye);

  const double n = ws.nodes();
  out.classical_term = f.f1.dot(z) / n;
  out.gap_term = f.f2.dot(z) / n;
  out.trigger_term = f3.dot(z) / n;
  out.value = out.classical_term + out.gap_term + out.trigger_term;
  return out;
}

bool vec_trace_identity_check(int dim, std::uint64_t seed, int pairs) {
  if (dim < 1 || dim > 32) throw InvalidRange("identity check supports 1 <= dim <= 32");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < pairs; ++t) {
    Matrix a(dim, dim), b(dim, dim);
    for (Eigen::Index j = 0; j < a.size(); ++j) a.data()[j] = normal(rng);
    for (Eigen::Index j = 0; j < b.size(); ++j) b.data()[j] = normal(rng);
    const double lhs = (a * b).trace();
    const double rhs = linalg::vec(a.transpose()).dot(linalg::vec(b));
    if (std::abs(lhs - rhs) > 1e-10) return false;
  }
  return true;
}

bool StabilityReport::all_mean_stable() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const auto& s) { return s.mean_ok; });
}

bool StabilityReport::all_spread_ok() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const auto& s) { return s.spread_ok; });
}

StabilityReport stability_report(const AnalysisWorkspace& ws, const CombinationMatrix& weights,
                                 const std::vector<NodeProfile>& profiles) {
  StabilityReport r;
  for (const auto& p : profiles) {
    const auto mean = mean_stability_condition(p);
    const auto msd = msd_step_size_interval(p);
    r.nodes.push_back({mean.bound, mean.satisfied, msd.lo, msd.hi, msd.spread_ok,
                       msd.spread_ok && msd.contains(p.mu())});
  }
  r.rho_B = linalg::spectral_radius(ws.B_mean(), 1024);
  if (ws.has_F()) r.rho_F = linalg::spectral_radius(ws.F_big());
  r.beta = mean_beta(profiles);
  r.alpha = combination_alpha(weights);
  return r;
}

BoundReport bound_report(const AnalysisWorkspace& ws, const CombinationMatrix& weights,
                         const std::vector<NodeProfile>& profiles,
                         const std::vector<TriggerPolicy>& policies,
                         const std::vector<double>& trigger_rates) {
  BoundReport r;
  r.gap_bounds = gap_bounds(policies);
  r.delta_sum = delta_total(policies);
  try {
    r.mean_error_bound = mean_error_bound(weights, profiles, policies);
  } catch (const UnstableConfiguration&) {
  }
  if (!ws.has_F()) {
    r.msd_note = "F not materialized (MN above cap)";
    return r;
  }
  const auto f = msd_bound_vectors(ws, r.delta_sum);
  const Matrix g = trigger_rates.empty()
                       ? Matrix::Zero(ws.extended_dim(), ws.extended_dim()).eval()
                       : empirical_trigger_matrix(trigger_rates, ws.dim());
  try {
    r.msd = msd_upper_bound(ws, f, g);
    r.msd_note = trigger_rates.empty() ? "O(mu_max^2) dropped; trigger term omitted (G=0)"
                                       : "O(mu_max^2) dropped; trigger term from empirical rates";
  } catch (const UnstableF& e) {
    r.msd_note = e.what();
  }
  return r;
}

KeyValues to_key_values(const StabilityReport& report) {
  KeyValues kv;
  kv.emplace_back("rho_B", fmt(report.rho_B));
  kv.emplace_back("rho_F", report.rho_F ? fmt(*report.rho_F) : "nan");
  kv.emplace_back("beta", fmt(report.beta));
  kv.emplace_back("alpha", fmt(report.alpha));
  kv.emplace_back("all_mean_stable", report.all_mean_stable() ? "true" : "false");
  kv.emplace_back("all_spread_ok", report.all_spread_ok() ? "true" : "false");
  for (std::size_t k = 0; k < report.nodes.size(); ++k) {
    const auto& s = report.nodes[k];
    const std::string p = "node" + std::to_string(k + 1) + ".";
    kv.emplace_back(p + "mean_mu_bound", fmt(s.mean_bound));
    kv.emplace_back(p + "mean_stable", s.mean_ok ? "true" : "false");
    kv.emplace_back(p + "msd_mu_lo", fmt(s.msd_lo));
    kv.emplace_back(p + "msd_mu_hi", fmt(s.msd_hi));
    kv.emplace_back(p + "spread_ok", s.spread_ok ? "true" : "false");
    kv.emplace_back(p + "msd_interval_empty", s.spread_ok ? "false" : "true");
    kv.emplace_back(p + "mu_in_msd_interval", s.msd_interval_ok ? "true" : "false");
  }
  return kv;
}

KeyValues to_key_values(const BoundReport& report) {
  KeyValues kv;
  kv.emplace_back("mean_error_bound",
                  report.mean_error_bound ? fmt(*report.mean_error_bound) : "unstable");
  kv.emplace_back("delta_sum", fmt(report.delta_sum));
  if (report.msd) {
    kv.emplace_back("msd_upper_bound", fmt(report.msd->value));
    kv.emplace_back("msd_classical_term", fmt(report.msd->classical_term));
    kv.emplace_back("msd_gap_term", fmt(report.msd->gap_term));
    kv.emplace_back("msd_trigger_term", fmt(report.msd->trigger_term));
    kv.emplace_back("rho_F", fmt(report.msd->rho_F));
  } else {
    kv.emplace_back("msd_upper_bound", "inf");
  }
  kv.emplace_back("msd_note", report.msd_note);
  for (std::size_t k = 0; k < report.gap_bounds.size(); ++k) {
    kv.emplace_back("node" + std::to_string(k + 1) + ".gap_bound", fmt(report.gap_bounds[k]));
  }
  return kv;
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

void write_csv_row(std::ostream& out, const KeyValues& kv, bool header) {
  for (std::size_t j = 0; j < kv.size(); ++j) {
    if (j) out << ',';
    out << (header ? kv[j].first : kv[j].second);
  }
  out << '\n';
}

}  // namespace ebdiff
