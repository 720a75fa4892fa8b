#include "ebdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ebdiff/errors.hpp"

namespace ebdiff {

double to_db(double linear) {
  if (!(linear > 0.0)) return kDbFloor;
  return std::max(10.0 * std::log10(linear), kDbFloor);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

ReplicaRecorder::ReplicaRecorder(int nodes, int dim, long horizon, bool track_error)
    : dim_(dim), track_error_(track_error) {
  curves_.nodes = nodes;
  curves_.msd.reserve(horizon);
  curves_.gamma.reserve(static_cast<std::size_t>(horizon) * nodes);
  if (track_error_) curves_.mean_error.resize(static_cast<Eigen::Index>(nodes) * dim, horizon);
}

void ReplicaRecorder::record(const DiffusionNetwork& net, const GroundTruth& truth) {
  const long i = curves_.horizon();
  double sum = 0.0;
  for (int k = 0; k < curves_.nodes; ++k) {
    const auto& s = net.state(k);
    if (track_error_) {
      auto col = curves_.mean_error.col(i).segment(static_cast<Eigen::Index>(k) * dim_, dim_);
      col = truth.w_star - s.w;
      sum += col.squaredNorm();
    } else {
      sum += (truth.w_star - s.w).squaredNorm();
    }
    curves_.gamma.push_back(static_cast<std::uint8_t>(s.gamma));
  }
  curves_.msd.push_back(sum / curves_.nodes);
}

ReplicaCurves replica_curves(const IterationTrace& trace, const GroundTruth& truth,
                             bool track_error) {
  ReplicaCurves rc;
  if (trace.size() == 0) return rc;
  const int n = static_cast<int>(trace.steps.front().gamma.size());
  const int m = static_cast<int>(trace.w.front().rows());
  rc.nodes = n;
  if (track_error) rc.mean_error.resize(static_cast<Eigen::Index>(n) * m, trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& rec = trace.steps[t];
    if (static_cast<int>(rec.gamma.size()) != n) throw ShapeMismatch("trace changes network size");
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vector err = truth.w_star - trace.w[t].col(k);
      sum += err.squaredNorm();
      if (track_error) rc.mean_error.col(t).segment(static_cast<Eigen::Index>(k) * m, m) = err;
      rc.gamma.push_back(rec.gamma[k]);
    }
    rc.msd.push_back(sum / n);
  }
  return rc;
}

std::vector<double> LearningCurves::per_node_trigger_rate(long start, long end) const {
  std::vector<double> rates(nodes, 0.0);
  if (end <= start) return rates;
  for (int k = 0; k < nodes; ++k) {
    rates[k] = node_rate.col(k).segment(start, end - start).mean();
  }
  return rates;
}

void CurveAccumulator::add(const ReplicaCurves& replica) {
  const long h = replica.horizon();
  if (count_ == 0) {
    nodes_ = replica.nodes;
    msd_sum_.assign(h, 0.0);
    gamma_sum_ = Matrix::Zero(h, nodes_);
    has_error_ = replica.mean_error.size() > 0;
    if (has_error_) error_sum_ = Matrix::Zero(replica.mean_error.rows(), h);
  }
  if (h != static_cast<long>(msd_sum_.size()) || replica.nodes != nodes_ ||
      static_cast<long>(replica.gamma.size()) != h * nodes_) {
    throw ShapeMismatch("replica differs in horizon or network size");
  }
  if (has_error_ != (replica.mean_error.size() > 0) ||
      (has_error_ && replica.mean_error.rows() != error_sum_.rows())) {
    throw ShapeMismatch("replica differs in tracked error shape");
  }
  for (long i = 0; i < h; ++i) {
    msd_sum_[i] += replica.msd[i];
    for (int k = 0; k < nodes_; ++k) gamma_sum_(i, k) += replica.gamma[i * nodes_ + k];
  }
  if (has_error_) error_sum_ += replica.mean_error;
  ++count_;
}

LearningCurves CurveAccumulator::finish() const {
  LearningCurves c;
  c.replicas = count_;
  c.nodes = nodes_;
  if (count_ == 0) return c;
  const double inv = 1.0 / static_cast<double>(count_);
  const long h = static_cast<long>(msd_sum_.size());
  c.msd_linear.resize(h);
  c.msd_db.resize(h);
  c.entr.resize(h);
  c.node_rate = gamma_sum_ * inv;
  for (long i = 0; i < h; ++i) {
    c.msd_linear[i] = msd_sum_[i] * inv;
    c.msd_db[i] = to_db(c.msd_linear[i]);
    c.entr[i] = std::clamp(c.node_rate.row(i).mean(), 0.0, 1.0);
  }
  if (has_error_) c.mean_error = error_sum_ * inv;
  return c;
}

LearningCurves accumulate(const std::vector<IterationTrace>& traces, const GroundTruth& truth) {
  CurveAccumulator acc;
  for (const auto& t : traces) acc.add(replica_curves(t, truth));
  return acc.finish();
}

SteadyStateSummary steady_state(const LearningCurves& curves, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw InvalidRange("window fraction must lie in (0, 1]");
  }
  const long h = curves.horizon();
  const long len = static_cast<long>(std::floor(window_fraction * static_cast<double>(h) + 1e-9));
  if (len < 1) {
    throw HorizonTooShort("horizon " + std::to_string(h) + " leaves an empty steady-state window");
  }
  SteadyStateSummary s;
  s.window_start = h - len;
  s.window_end = h;
  double db = 0.0, entr = 0.0;
  for (long i = s.window_start; i < h; ++i) {
    db += curves.msd_db[i];
    entr += curves.entr[i];
  }
  s.msd_ss_db = db / len;
  s.entr_ss = entr / len;

  const double reach = 0.1 * std::abs(curves.msd_db[0] - s.msd_ss_db);
  s.settle_instant = h;
  for (long i = 0; i < h; ++i) {
    if (std::abs(curves.msd_db[i] - s.msd_ss_db) <= reach) {
      s.settle_instant = i;
      break;
    }
  }
  s.settle_instant = std::min(s.settle_instant, s.window_end);
  s.node_rates = curves.per_node_trigger_rate(s.window_start, s.window_end);
  return s;
}

void GapAudit::observe(const StepRecord& record, const std::vector<TriggerPolicy>& policies) {
  for (std::size_t k = 0; k < record.gamma.size(); ++k) {
    const double gap = record.posterior_gap_sq[k];
    ++checks;
    if (record.gamma[k] && gap != 0.0) ++exactness_violations;
    if (policies.empty()) continue;
    const auto& p = policies[k];
    const double delta = p.delta_sup();
    // ||eps||^2 <= delta / lambda_min, compared as lambda_min ||eps||^2 <= delta
    const double scaled = p.lambda_min() * gap;
    if (scaled > delta) ++bound_violations;
    if (delta > 0.0) max_ratio = std::max(max_ratio, scaled / delta);
  }
}

void GapAudit::merge(const GapAudit& other) {
  checks += other.checks;
  bound_violations += other.bound_violations;
  exactness_violations += other.exactness_violations;
  max_ratio = std::max(max_ratio, other.max_ratio);
}

void write_curves_csv(std::ostream& out, const LearningCurves& curves) {
  out << "instant,msd_linear,msd_dB,entr\n" << std::setprecision(17);
  for (long i = 0; i < curves.horizon(); ++i) {
    out << i << ',' << curves.msd_linear[i] << ',' << curves.msd_db[i] << ',' << curves.entr[i]
        << '\n';
  }
}

void write_rates_csv(std::ostream& out, const std::vector<double>& rates) {
  out << "node,trigger_rate\n" << std::setprecision(17);
  for (std::size_t k = 0; k < rates.size(); ++k) out << (k + 1) << ',' << rates[k] << '\n';
}

}  // namespace ebdiff
