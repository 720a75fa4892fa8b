#include "ebdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ebdiff/errors.hpp"

namespace ebdiff {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kAtc:
      return "ATC";
    case Algorithm::kEbAtc:
      return "EB-ATC";
    case Algorithm::kNonCoop:
      return "NONCOOP";
  }
  return "?";
}

ThresholdSchedule ThresholdSchedule::constant(double delta) {
  return piecewise({{0, delta}});
}

ThresholdSchedule ThresholdSchedule::piecewise(std::vector<std::pair<long, double>> breakpoints) {
  if (breakpoints.empty()) throw InvalidRange("threshold schedule needs a breakpoint");
  std::sort(breakpoints.begin(), breakpoints.end());
  ThresholdSchedule s;
  for (std::size_t j = 0; j < breakpoints.size(); ++j) {
    const auto [start, value] = breakpoints[j];
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw InvalidRange("thresholds must be finite and >= 0");
    }
    if (j > 0 && start == breakpoints[j - 1].first) {
      throw InvalidRange("duplicate threshold breakpoint at instant " + std::to_string(start));
    }
    s.sup_ = std::max(s.sup_, value);
  }
  s.breakpoints_ = std::move(breakpoints);
  return s;
}

double ThresholdSchedule::at(long instant) const {
  auto it = std::upper_bound(
      breakpoints_.begin(), breakpoints_.end(), instant,
      [](long i, const std::pair<long, double>& bp) { return i < bp.first; });
  if (it == breakpoints_.begin()) return breakpoints_.front().second;
  return std::prev(it)->second;
}

TriggerPolicy::TriggerPolicy(Matrix weighting, ThresholdSchedule schedule)
    : y_(std::move(weighting)), schedule_(std::move(schedule)) {
  if (y_.rows() < 1 || y_.rows() != y_.cols()) {
    throw InvalidRange("trigger weighting matrix must be square");
  }
  if ((y_ - y_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidRange("trigger weighting matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(y_, Eigen::EigenvaluesOnly);
  lambda_min_ = eig.eigenvalues().minCoeff();
  if (lambda_min_ < -1e-12) {
    throw InvalidRange("trigger weighting matrix must be positive semi-definite");
  }
  lambda_min_ = std::max(lambda_min_, 0.0);
  identity_ = y_.isIdentity(0.0);
}

TriggerPolicy TriggerPolicy::identity(int dim, ThresholdSchedule schedule) {
  return TriggerPolicy(Matrix::Identity(dim, dim), std::move(schedule));
}

double TriggerPolicy::weighted_norm_sq(const Vector& x) const {
  if (identity_) return x.squaredNorm();
  return x.dot(y_ * x);
}

NodeState NodeState::zero(int dim) {
  NodeState s;
  s.w = Vector::Zero(dim);
  s.psi = Vector::Zero(dim);
  s.psi_bar = Vector::Zero(dim);
  return s;
}

const Vector& adapt(NodeState& state, const DataSample& sample, double mu, int node,
                    long instant) {
  const double err = sample.d - sample.u.dot(state.w);
  state.psi.noalias() = state.w + (mu * err) * sample.u;
  if (!state.psi.allFinite()) throw NonFiniteUpdate(node, instant);
  return state.psi;
}

int evaluate_trigger(NodeState& state, const TriggerPolicy& policy, long instant) {
  state.prior_gap = policy.weighted_norm_sq(state.psi - state.psi_bar);
  if (state.prior_gap > policy.threshold(instant)) {
    state.psi_bar = state.psi;
    state.gamma = 1;
  } else {
    state.gamma = 0;
  }
  return state.gamma;
}

Vector combine(const NodeState& self, int k, const std::map<int, Vector>& neighbor_psi_bars,
               const Eigen::Ref<const Vector>& a_column) {
  Vector w = a_column(k) * self.psi;
  for (Eigen::Index l = 0; l < a_column.size(); ++l) {
    if (l == k || a_column(l) == 0.0) continue;
    auto it = neighbor_psi_bars.find(static_cast<int>(l));
    if (it == neighbor_psi_bars.end()) {
      throw MissingNeighborState("node " + std::to_string(k + 1) + " has no published estimate from node " +
                                 std::to_string(l + 1));
    }
    w += a_column(l) * it->second;
  }
  return w;
}

DiffusionNetwork::DiffusionNetwork(Algorithm algorithm, const NetworkTopology& topology,
                                   CombinationMatrix weights, std::vector<NodeProfile> profiles,
                                   std::vector<TriggerPolicy> policies)
    : algorithm_(algorithm), profiles_(std::move(profiles)), policies_(std::move(policies)) {
  const int n = topology.size();
  if (static_cast<int>(profiles_.size()) != n) {
    throw ShapeMismatch("expected one profile per node");
  }
  dim_ = profiles_.front().dim();
  for (const auto& p : profiles_) {
    if (p.dim() != dim_) throw ShapeMismatch("profiles disagree on dimension");
  }
  if (algorithm_ == Algorithm::kEbAtc) {
    if (static_cast<int>(policies_.size()) != n) {
      throw ShapeMismatch("EB-ATC needs one trigger policy per node");
    }
    for (const auto& p : policies_) {
      if (p.weighting().rows() != dim_) throw ShapeMismatch("trigger weighting has wrong size");
    }
  }
  const auto report = validate_combination(weights, topology);
  if (!report.ok()) throw InvalidRange("combination matrix violates its invariants");

  mixing_.resize(n);
  self_weight_.resize(n);
  for (int k = 0; k < n; ++k) {
    self_weight_[k] = weights(k, k);
    for (int l : topology.neighborhood(k)) {
      if (l != k && weights(l, k) != 0.0) mixing_[k].emplace_back(l, weights(l, k));
    }
  }
  record_.gamma.resize(n);
  record_.prior_gap.resize(n);
  record_.posterior_gap_sq.resize(n);
  reset();
}

void DiffusionNetwork::reset() {
  states_.assign(profiles_.size(), NodeState::zero(dim_));
}

const StepRecord& DiffusionNetwork::step(const std::vector<DataSample>& samples, long instant) {
  const int n = size();
  if (static_cast<int>(samples.size()) != n) throw ShapeMismatch("expected one sample per node");
  record_.instant = instant;

  for (int k = 0; k < n; ++k) adapt(states_[k], samples[k], profiles_[k].mu(), k, instant);

  switch (algorithm_) {
    case Algorithm::kNonCoop:
      for (int k = 0; k < n; ++k) {
        auto& s = states_[k];
        s.gamma = 0;
        s.prior_gap = 0.0;
        s.w = s.psi;
      }
      break;
    case Algorithm::kAtc:
      for (int k = 0; k < n; ++k) {
        auto& s = states_[k];
        s.prior_gap = (s.psi - s.psi_bar).squaredNorm();
        s.psi_bar = s.psi;
        s.gamma = 1;
      }
      break;
    case Algorithm::kEbAtc:
      for (int k = 0; k < n; ++k) evaluate_trigger(states_[k], policies_[k], instant);
      break;
  }

  if (algorithm_ != Algorithm::kNonCoop) {
    for (int k = 0; k < n; ++k) {
      auto& s = states_[k];
      s.w.noalias() = self_weight_[k] * s.psi;
      for (const auto& [l, a] : mixing_[k]) s.w.noalias() += a * states_[l].psi_bar;
    }
  }

  for (int k = 0; k < n; ++k) {
    const auto& s = states_[k];
    record_.gamma[k] = static_cast<std::uint8_t>(s.gamma);
    record_.prior_gap[k] = s.prior_gap;
    record_.posterior_gap_sq[k] =
        algorithm_ == Algorithm::kNonCoop ? 0.0 : (s.psi - s.psi_bar).squaredNorm();
  }
  return record_;
}

IterationTrace DiffusionNetwork::run(std::vector<DataStream>& streams, const GroundTruth& truth,
                                     long horizon) {
  const int n = size();
  if (static_cast<int>(streams.size()) != n) throw ShapeMismatch("expected one stream per node");
  IterationTrace trace;
  std::vector<DataSample> samples(n);
  for (long i = 0; i < horizon; ++i) {
    for (int k = 0; k < n; ++k) streams[k].next_into(profiles_[k], truth, samples[k]);
    trace.steps.push_back(step(samples, i));
    Matrix psi(dim_, n), w(dim_, n);
    for (int k = 0; k < n; ++k) {
      psi.col(k) = states_[k].psi;
      w.col(k) = states_[k].w;
    }
    trace.psi.push_back(std::move(psi));
    trace.w.push_back(std::move(w));
  }
  return trace;
}

double DiffusionNetwork::network_msd(const GroundTruth& truth) const {
  double sum = 0.0;
  for (const auto& s : states_) sum += (truth.w_star - s.w).squaredNorm();
  return sum / size();
}

void write_trace_header(std::ostream& out) {
  out << "replica,instant,node,gamma,gap_norm_sq,msd_contribution\n";
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace, const GroundTruth& truth,
                     long replica) {
  out << std::setprecision(17);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& rec = trace.steps[t];
    const auto& w = trace.w[t];
    const int n = static_cast<int>(rec.gamma.size());
    for (int k = 0; k < n; ++k) {
      const double contrib = (truth.w_star - w.col(k)).squaredNorm() / n;
      out << replica << ',' << rec.instant << ',' << (k + 1) << ',' << int(rec.gamma[k]) << ','
          << rec.posterior_gap_sq[k] << ',' << contrib << '\n';
    }
  }
}

}  // namespace ebdiff
