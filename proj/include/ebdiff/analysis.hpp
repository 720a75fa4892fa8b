#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ebdiff/datamodel.hpp"
#include "ebdiff/diffusion.hpp"
#include "ebdiff/topology.hpp"

namespace ebdiff {

// Largest MN for which the (MN)^2 x (MN)^2 matrix F = 2 B^T (x) B^T is built.
inline constexpr int kDefaultFCap = 64;

// Extended network matrices of the error recursion. All are MN x MN except F.
class AnalysisWorkspace {
 public:
  int nodes() const noexcept { return nodes_; }
  int dim() const noexcept { return dim_; }
  int extended_dim() const noexcept { return nodes_ * dim_; }

  const Matrix& A_ext() const noexcept { return a_ext_; }  // A (x) I_M
  const Matrix& C_ext() const noexcept { return c_ext_; }  // (A - diag(a_kk)) (x) I_M
  const Matrix& M_ext() const noexcept { return m_ext_; }  // diag(mu_k I_M)
  const Matrix& R_ext() const noexcept { return r_ext_; }  // diag(R_u,k)
  const Matrix& S_ext() const noexcept { return s_ext_; }  // diag(sigma2_v,k R_u,k)
  const Matrix& B_mean() const noexcept { return b_mean_; }  // A_ext^T (I - M R)

  bool has_F() const noexcept { return f_big_.size() > 0; }
  // Throws DimensionCapExceeded when F was not materialized.
  const Matrix& F_big() const;
  int f_cap() const noexcept { return f_cap_; }

  friend AnalysisWorkspace build_workspace(const CombinationMatrix&,
                                           const std::vector<NodeProfile>&, int);

 private:
  int nodes_ = 0;
  int dim_ = 0;
  int f_cap_ = kDefaultFCap;
  Matrix a_ext_, c_ext_, m_ext_, r_ext_, s_ext_, b_mean_, f_big_;
};

// Builds every matrix; F only when MN <= f_cap.
AnalysisWorkspace build_workspace(const CombinationMatrix& weights,
                                  const std::vector<NodeProfile>& profiles,
                                  int f_cap = kDefaultFCap);

// Block maximum norm of a block-diagonal matrix with symmetric M x M blocks,
// i.e. the largest block spectral radius. Throws UnsupportedStructure otherwise.
double block_max_norm(const Matrix& block_diagonal, int block_size);

// max_k ||x_k|| over the M-blocks of x.
double block_max_vector_norm(const Vector& x, int block_size);

struct MeanStability {
  double bound;  // 2 / lambda_max(R_u)
  bool satisfied;
};
MeanStability mean_stability_condition(const NodeProfile& profile);

struct MsdStepInterval {
  double lo;
  double hi;
  bool spread_ok;  // interval non-empty
  bool contains(double mu) const noexcept { return lo < mu && mu < hi; }
};
MsdStepInterval msd_step_size_interval(const NodeProfile& profile);

// max_k (1 - a_kk)
double combination_alpha(const CombinationMatrix& weights);

// ||I - M R_u||_{b,inf}
double mean_beta(const std::vector<NodeProfile>& profiles);

// sqrt(delta_k / lambda_min(Y_k)) per node. Throws SingularWeighting.
std::vector<double> gap_bounds(const std::vector<TriggerPolicy>& policies);

// alpha / (1 - beta) * max_k sqrt(delta_k / lambda_min(Y_k)).
// Throws UnstableConfiguration if beta >= 1, SingularWeighting if some Y_k is singular.
double mean_error_bound(const CombinationMatrix& weights, const std::vector<NodeProfile>& profiles,
                        const std::vector<TriggerPolicy>& policies);

// Delta = sum_k sqrt(delta_k / lambda_min(Y_k)).
double delta_total(const std::vector<TriggerPolicy>& policies);

struct MsdBoundVectors {
  Vector f1;  // vec(A^T M S M A)
  Vector f2;  // 2 Delta vec(C^T C)
};
MsdBoundVectors msd_bound_vectors(const AnalysisWorkspace& ws, double delta_sum);

// diag(rate_k I_M) - I_MN
Matrix empirical_trigger_matrix(const std::vector<double>& trigger_rates, int dim);

struct MsdBound {
  double value = 0.0;         // (1/N)(f1 + f2 + f3_ss)^T (I - F)^{-1} vec(I)
  double classical_term = 0.0;  // (1/N) f1^T (I - F)^{-1} vec(I)
  double gap_term = 0.0;        // (1/N) f2^T (I - F)^{-1} vec(I)
  double trigger_term = 0.0;    // (1/N) f3_ss^T (I - F)^{-1} vec(I)
  double rho_F = 0.0;
  bool remainder_dropped = true;  // the O(mu_max^2) term is not included
};

// Steady-state MSD upper bound with f3,inf approximated from a constant
// trigger matrix G. Throws UnstableF if rho(F) >= 1 and
// DimensionCapExceeded if F is not available.
MsdBound msd_upper_bound(const AnalysisWorkspace& ws, const MsdBoundVectors& f,
                         const Matrix& trigger_matrix);

// Samples random dim x dim pairs and checks Tr(AB) = vec(A^T)^T vec(B) to 1e-10.
bool vec_trace_identity_check(int dim, std::uint64_t seed, int pairs = 1);

struct NodeStability {
  double mean_bound;
  bool mean_ok;
  double msd_lo;
  double msd_hi;
  bool spread_ok;
  bool msd_interval_ok;
};

struct StabilityReport {
  std::vector<NodeStability> nodes;
  double rho_B = 0.0;
  std::optional<double> rho_F;  // present when F was materialized
  double beta = 0.0;
  double alpha = 0.0;

  bool all_mean_stable() const;
  bool all_spread_ok() const;
};

StabilityReport stability_report(const AnalysisWorkspace& ws, const CombinationMatrix& weights,
                                 const std::vector<NodeProfile>& profiles);

struct BoundReport {
  std::vector<double> gap_bounds;
  std::optional<double> mean_error_bound;  // empty when beta >= 1
  double delta_sum = 0.0;
  std::optional<MsdBound> msd;  // empty when rho(F) >= 1 or F unavailable
  std::string msd_note;
};

// When `trigger_rates` is empty the trigger term is left out (G = 0).
BoundReport bound_report(const AnalysisWorkspace& ws, const CombinationMatrix& weights,
                         const std::vector<NodeProfile>& profiles,
                         const std::vector<TriggerPolicy>& policies,
                         const std::vector<double>& trigger_rates = {});

using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues to_key_values(const StabilityReport& report);
KeyValues to_key_values(const BoundReport& report);
void write_key_values(std::ostream& out, const KeyValues& kv);
void write_csv_row(std::ostream& out, const KeyValues& kv, bool header);

}  // namespace ebdiff
