#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebdiff/analysis.hpp"
#include "ebdiff/datamodel.hpp"
#include "ebdiff/diffusion.hpp"

namespace ebdiff {

enum class TopologyKind { kRandomGeometric, kPath, kComplete, kFile };

// One algorithm run inside an experiment. `schedule` is set for EB-ATC only.
struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::kAtc;
  std::optional<ThresholdSchedule> schedule;

  std::string label() const;  // "ATC", "NONCOOP", "EB-ATC(delta=0.01)"
  std::string slug() const;   // file-name friendly: "atc", "noncoop", "ebatc_d0.01"
};

// Experiment description read from a flat key=value file. Defaults reproduce
// the 60-node, M=10, 200-replica setup.
struct ExperimentConfig {
  int nodes = 60;
  int dim = 10;
  long horizon = 1000;
  long replicas = 200;

  TopologyKind topology = TopologyKind::kRandomGeometric;
  double topology_radius = 0.25;
  std::uint64_t topology_seed = 7;
  std::string topology_file;

  Interval regressor_power{1.0, 2.0};
  Interval noise_db{-25.0, -10.0};
  std::vector<double> regressor_cov_diag;  // overrides sampled powers when non-empty
  double mu = 0.05;

  std::vector<AlgorithmSpec> algorithms;
  std::vector<double> trigger_weight_diag;  // Y = diag(...); identity when empty

  std::uint64_t seed = 1;
  std::string out_dir = "results";
  double window_fraction = 0.1;
  int f_cap = kDefaultFCap;
  bool trace = false;

  // Canonical "key=value" lines for every setting, in a fixed order.
  std::vector<std::pair<std::string, std::string>> resolved() const;
  std::uint64_t hash() const;

  TriggerPolicy policy_for(const AlgorithmSpec& spec) const;
};

// Parses and validates. ParseError carries the offending line; ValidationError
// lists every violated constraint.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

// Applies defaults only; the full-scale experiment.
ExperimentConfig default_config();

void validate_config(const ExperimentConfig& config);

// "ATC, NONCOOP, EB-ATC" style list. Plain EB-ATC expands over `deltas`;
// "EB-ATC:0.01" pins one threshold; "EB-ATC:0=0.1;200=0.01" gives a
// piecewise schedule.
std::vector<AlgorithmSpec> parse_algorithms(const std::string& text,
                                            const std::vector<double>& deltas);

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace ebdiff
