#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ebdiff {

using Edge = std::pair<int, int>;

// Undirected connected graph over nodes 0..N-1. Each neighborhood includes
// the node itself and is kept sorted.
class NetworkTopology {
 public:
  int size() const noexcept { return static_cast<int>(neighborhoods_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& neighborhood(int k) const { return neighborhoods_.at(k); }
  int degree(int k) const { return static_cast<int>(neighborhoods_.at(k).size()); }
  bool adjacent(int k, int l) const;

  friend NetworkTopology build_topology(int n_nodes, const std::vector<Edge>& edges);

 private:
  std::vector<Edge> edges_;  // normalized: first < second, sorted, unique
  std::vector<std::vector<int>> neighborhoods_;
};

// Entry (l, k) is the weight node k applies to node l's estimate; columns sum to 1.
using CombinationMatrix = Eigen::MatrixXd;

// Edges use 0-based node indices. Throws InvalidEdge on out-of-range endpoints
// or self-loops and DisconnectedGraph when the graph has more than one component.
NetworkTopology build_topology(int n_nodes, const std::vector<Edge>& edges);

// Nodes uniform in the unit square, edge iff distance <= radius. Placement is
// redrawn until the graph is connected or `max_attempts` is exhausted
// (ConnectivityFailure).
NetworkTopology random_geometric_topology(int n_nodes, double radius, std::uint64_t seed,
                                          int max_attempts = 1000);

NetworkTopology path_topology(int n_nodes);
NetworkTopology complete_topology(int n_nodes);

CombinationMatrix metropolis_weights(const NetworkTopology& topology);

struct CombinationViolation {
  enum class Kind { Negative, ColumnSum, Sparsity, Dimension };
  Kind kind;
  int row;  // -1 when the violation is about a whole column
  int col;
  double value;
};

struct CombinationReport {
  bool nonnegative = true;
  bool columns_stochastic = true;
  bool sparsity = true;
  std::vector<CombinationViolation> violations;

  bool ok() const noexcept { return nonnegative && columns_stochastic && sparsity; }
};

inline constexpr double kStochasticTolerance = 1e-12;

CombinationReport validate_combination(const CombinationMatrix& weights,
                                       const NetworkTopology& topology,
                                       double tolerance = kStochasticTolerance);

// Plain-text edge list: "N <count>" then one 1-indexed "u v" pair per line.
void write_edge_list(std::ostream& out, const NetworkTopology& topology);
NetworkTopology read_edge_list(std::istream& in);
NetworkTopology load_edge_list(const std::string& path);

}  // namespace ebdiff
