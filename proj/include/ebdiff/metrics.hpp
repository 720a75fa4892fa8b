#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "ebdiff/datamodel.hpp"
#include "ebdiff/diffusion.hpp"

namespace ebdiff {

inline constexpr double kDbFloor = -300.0;

// 10 log10(x), floored at kDbFloor (so exact zero stays finite).
double to_db(double linear);
double from_db(double db);

// Per-replica record of one run, the unit the accumulator reduces over.
struct ReplicaCurves {
  std::vector<double> msd;                // (1/N) sum_k ||w_star - w_k(i)||^2
  std::vector<std::uint8_t> gamma;        // instant-major, N per instant
  Matrix mean_error;                      // MN x horizon of w_star - w_k(i); empty if not tracked
  int nodes = 0;

  long horizon() const noexcept { return static_cast<long>(msd.size()); }
};

// Records per-instant data from a DiffusionNetwork while it runs.
class ReplicaRecorder {
 public:
  ReplicaRecorder(int nodes, int dim, long horizon, bool track_error);
  void record(const DiffusionNetwork& net, const GroundTruth& truth);
  ReplicaCurves take() { return std::move(curves_); }

 private:
  ReplicaCurves curves_;
  int dim_;
  bool track_error_;
};

ReplicaCurves replica_curves(const IterationTrace& trace, const GroundTruth& truth,
                             bool track_error = false);

struct LearningCurves {
  std::vector<double> msd_linear;
  std::vector<double> msd_db;
  std::vector<double> entr;
  Matrix node_rate;              // horizon x N, replica mean of gamma_k(i)
  Matrix mean_error;             // MN x horizon replica mean of w_star - w(i); may be empty
  long replicas = 0;
  int nodes = 0;

  long horizon() const noexcept { return static_cast<long>(msd_linear.size()); }
  // Mean of node_rate over instants [start, end).
  std::vector<double> per_node_trigger_rate(long start, long end) const;
};

// Ordered reduction over replicas. Adding the same replicas in the same order
// yields identical results regardless of how they were produced.
class CurveAccumulator {
 public:
  void add(const ReplicaCurves& replica);
  LearningCurves finish() const;
  long count() const noexcept { return count_; }

 private:
  std::vector<double> msd_sum_;
  Matrix gamma_sum_;  // horizon x N
  Matrix error_sum_;
  bool has_error_ = false;
  long count_ = 0;
  int nodes_ = 0;
};

// Throws ShapeMismatch if replicas disagree on horizon or network size.
LearningCurves accumulate(const std::vector<IterationTrace>& traces, const GroundTruth& truth);

struct SteadyStateSummary {
  long window_start = 0;  // half-open [window_start, window_end)
  long window_end = 0;
  double msd_ss_db = 0.0;
  double entr_ss = 0.0;
  long settle_instant = 0;
  std::vector<double> node_rates;
};

// Statistics over the trailing `window_fraction` of the horizon. The settle
// instant is the first i with |msd_db(i) - ss| <= 0.1 |msd_db(0) - ss|.
// Throws HorizonTooShort when the window would be empty.
SteadyStateSummary steady_state(const LearningCurves& curves, double window_fraction = 0.1);

// Counts a posteriori gaps above sqrt(delta_k / lambda_min(Y_k)) and fired
// instants whose gap is not exactly zero.
struct GapAudit {
  long checks = 0;
  long bound_violations = 0;
  long exactness_violations = 0;
  double max_ratio = 0.0;  // max ||eps||^2 lambda_min / delta over checks with delta > 0

  void observe(const StepRecord& record, const std::vector<TriggerPolicy>& policies);
  void merge(const GapAudit& other);
  bool clean() const noexcept { return bound_violations == 0 && exactness_violations == 0; }
};

// "instant,msd_linear,msd_dB,entr"
void write_curves_csv(std::ostream& out, const LearningCurves& curves);
// "node,trigger_rate"
void write_rates_csv(std::ostream& out, const std::vector<double>& rates);

}  // namespace ebdiff
