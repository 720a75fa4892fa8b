#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ebdiff/datamodel.hpp"
#include "ebdiff/topology.hpp"

namespace ebdiff {

enum class Algorithm { kAtc, kEbAtc, kNonCoop };

std::string to_string(Algorithm algorithm);

// Piecewise-constant threshold delta(i): each breakpoint (start, value) holds
// from `start` until the next breakpoint. Instants before the first
// breakpoint use its value.
class ThresholdSchedule {
 public:
  static ThresholdSchedule constant(double delta);
  static ThresholdSchedule piecewise(std::vector<std::pair<long, double>> breakpoints);

  double at(long instant) const;
  double supremum() const noexcept { return sup_; }
  bool is_constant() const noexcept { return breakpoints_.size() == 1; }
  const std::vector<std::pair<long, double>>& breakpoints() const noexcept {
    return breakpoints_;
  }

 private:
  std::vector<std::pair<long, double>> breakpoints_;
  double sup_ = 0.0;
};

// Trigger rule of one node: fire when (psi - psi_bar)^T Y (psi - psi_bar) > delta(i).
class TriggerPolicy {
 public:
  TriggerPolicy(Matrix weighting, ThresholdSchedule schedule);

  static TriggerPolicy identity(int dim, ThresholdSchedule schedule);
  static TriggerPolicy constant(int dim, double delta) {
    return identity(dim, ThresholdSchedule::constant(delta));
  }

  const Matrix& weighting() const noexcept { return y_; }
  const ThresholdSchedule& schedule() const noexcept { return schedule_; }
  double threshold(long instant) const { return schedule_.at(instant); }
  double delta_sup() const noexcept { return schedule_.supremum(); }
  double lambda_min() const noexcept { return lambda_min_; }
  bool positive_definite() const noexcept { return lambda_min_ > 0.0; }

  // x^T Y x. Uses the squared Euclidean norm directly when Y = I.
  double weighted_norm_sq(const Vector& x) const;

 private:
  Matrix y_;
  ThresholdSchedule schedule_;
  double lambda_min_ = 0.0;
  bool identity_ = false;
};

// w_k(i-1) before adapt, w_k(i) after combine. psi_bar is what neighbors see.
struct NodeState {
  Vector w;
  Vector psi;
  Vector psi_bar;
  int gamma = 0;
  double prior_gap = 0.0;  // f(psi - psi_bar(i-1)) from the last trigger evaluation

  static NodeState zero(int dim);
};

// psi = w + mu u (d - u^T w). Throws NonFiniteUpdate on NaN/Inf.
const Vector& adapt(NodeState& state, const DataSample& sample, double mu, int node = -1,
                    long instant = -1);

// Evaluates the trigger at instant i and publishes psi on fire. Ties do not fire.
int evaluate_trigger(NodeState& state, const TriggerPolicy& policy, long instant);

// w_k = a_kk psi_k + sum_{l != k} a_lk psi_bar_l over the nonzero entries of
// a_column. Throws MissingNeighborState if a weighted neighbor is absent.
Vector combine(const NodeState& self, int k, const std::map<int, Vector>& neighbor_psi_bars,
               const Eigen::Ref<const Vector>& a_column);

struct StepRecord {
  long instant = 0;
  std::vector<std::uint8_t> gamma;
  std::vector<double> prior_gap;       // f(eps^-_k(i))
  std::vector<double> posterior_gap_sq;  // ||psi_k(i) - psi_bar_k(i)||^2
};

struct IterationTrace {
  std::vector<StepRecord> steps;
  std::vector<Matrix> psi;  // M x N snapshot per instant
  std::vector<Matrix> w;    // M x N snapshot per instant
  std::size_t size() const noexcept { return steps.size(); }
};

// One replica of ATC / EB-ATC / non-cooperative LMS over a fixed network.
class DiffusionNetwork {
 public:
  DiffusionNetwork(Algorithm algorithm, const NetworkTopology& topology,
                   CombinationMatrix weights, std::vector<NodeProfile> profiles,
                   std::vector<TriggerPolicy> policies = {});

  // Synchronous instant: all nodes adapt, then all evaluate triggers and
  // publish, then all combine with this instant's published values.
  const StepRecord& step(const std::vector<DataSample>& samples, long instant);

  // Runs `horizon` instants drawing from the given per-node streams and
  // records every step.
  IterationTrace run(std::vector<DataStream>& streams, const GroundTruth& truth, long horizon);

  Algorithm algorithm() const noexcept { return algorithm_; }
  int size() const noexcept { return static_cast<int>(states_.size()); }
  int dim() const noexcept { return dim_; }
  const std::vector<NodeState>& states() const noexcept { return states_; }
  const NodeState& state(int k) const { return states_.at(k); }
  const std::vector<NodeProfile>& profiles() const noexcept { return profiles_; }
  const std::vector<TriggerPolicy>& policies() const noexcept { return policies_; }
  const StepRecord& last_step() const noexcept { return record_; }

  // Mean over nodes of ||w_star - w_k||^2 for the current estimates.
  double network_msd(const GroundTruth& truth) const;

  void reset();

 private:
  Algorithm algorithm_;
  std::vector<std::vector<std::pair<int, double>>> mixing_;  // per k: (l, a_lk), l != k, a_lk != 0
  std::vector<double> self_weight_;
  std::vector<NodeProfile> profiles_;
  std::vector<TriggerPolicy> policies_;
  std::vector<NodeState> states_;
  StepRecord record_;
  int dim_ = 0;
};

// CSV rows "replica,instant,node,gamma,gap_norm_sq,msd_contribution", nodes 1-indexed.
void write_trace_header(std::ostream& out);
void write_trace_csv(std::ostream& out, const IterationTrace& trace, const GroundTruth& truth,
                     long replica);

}  // namespace ebdiff
