#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebdiff/analysis.hpp"
#include "ebdiff/config.hpp"
#include "ebdiff/errors.hpp"
#include "ebdiff/metrics.hpp"
#include "ebdiff/topology.hpp"

namespace ebdiff {

inline constexpr const char* kVersion = "ebdiff 0.1.0";

// Everything fixed across replicas: graph, weights, node statistics, w_star.
struct Scenario {
  NetworkTopology topology;
  CombinationMatrix weights;
  std::vector<NodeProfile> profiles;
  GroundTruth truth;
};

Scenario build_scenario(const ExperimentConfig& config);

struct AlgorithmResult {
  AlgorithmSpec spec;
  LearningCurves curves;
  SteadyStateSummary summary;
  GapAudit audit;
  std::string trace_csv;  // filled when RunOptions::collect_trace is set
};

struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t config_hash = 0;
  std::string version = kVersion;
  std::vector<std::uint64_t> replica_seeds;
  std::vector<std::uint64_t> stream_checksums;  // per replica, over every (u, d) drawn
  long completed_replicas = 0;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> files;
  std::string abort_reason;
};

struct RunOptions {
  int threads = 1;
  bool track_mean_error = false;
  // Keep per-node trace rows (replica, instant, node, gamma, gap, msd share).
  bool collect_trace = false;
};

struct ExperimentResult {
  Scenario scenario;
  std::vector<AlgorithmResult> algorithms;
  RunManifest manifest;

  const AlgorithmResult* find(Algorithm algorithm, std::optional<double> delta = {}) const;
};

// Runs every configured algorithm over `replicas` replicas. Within a replica
// all algorithms consume the same data samples. Replicas execute in fixed
// batches and are reduced in replica order, so results do not depend on
// the thread count. A NonFiniteUpdate aborts the run: the partial result is
// available through the exception's `partial`.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

class ExperimentAborted : public Error {
 public:
  ExperimentAborted(const std::string& what, ExperimentResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const ExperimentResult& partial() const noexcept { return partial_; }

 private:
  ExperimentResult partial_;
};

// Writes curves_<slug>.csv, rates_<slug>.csv, summary.csv, profiles.txt,
// topology.txt, manifest.txt (and trace_<slug>.csv when traces were
// collected) into `dir`; records the inventory in the manifest.
void write_outputs(const std::string& dir, ExperimentResult& result);
void write_manifest(const std::string& path, const RunManifest& manifest);

struct BoundComparison {
  AlgorithmSpec spec;
  double empirical_mean_error = 0.0;  // block-max norm of the window-averaged mean error
  double mean_error_bound = 0.0;
  double empirical_msd = 0.0;  // window mean of the linear network MSD
  std::optional<MsdBound> msd_bound;
  std::string msd_note;
  std::vector<double> trigger_rates;

  double mean_slack() const { return mean_error_bound - empirical_mean_error; }
  double msd_slack() const {
    return msd_bound ? msd_bound->value - empirical_msd : -1.0;
  }
};

struct ComparisonResult {
  StabilityReport stability;
  std::vector<BoundComparison> rows;
  ExperimentResult simulation;
};

// Simulation plus the mean and MSD bounds for every ATC / EB-ATC entry in the
// config. Throws UnstableConfiguration if ||I - M R_u||_b,inf >= 1 and
// DimensionCapExceeded if MN exceeds f_cap.
ComparisonResult run_bound_comparison(const ExperimentConfig& config,
                                      const RunOptions& options = {});

void write_comparison(const std::string& dir, const ComparisonResult& result);

}  // namespace ebdiff
