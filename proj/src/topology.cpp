#include "ebdiff/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "ebdiff/errors.hpp"

namespace ebdiff {

bool NetworkTopology::adjacent(int k, int l) const {
  const auto& nk = neighborhoods_.at(k);
  return std::binary_search(nk.begin(), nk.end(), l);
}

NetworkTopology build_topology(int n_nodes, const std::vector<Edge>& edges) {
  if (n_nodes < 1) throw InvalidEdge("topology needs at least one node");

  NetworkTopology topo;
  topo.neighborhoods_.resize(n_nodes);
  for (int k = 0; k < n_nodes; ++k) topo.neighborhoods_[k].push_back(k);

  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes) {
      throw InvalidEdge("edge (" + std::to_string(u + 1) + "," + std::to_string(v + 1) +
                        ") has an endpoint outside 1.." + std::to_string(n_nodes));
    }
    if (u == v) throw InvalidEdge("self-loop on node " + std::to_string(u + 1));
    topo.edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(topo.edges_.begin(), topo.edges_.end());
  topo.edges_.erase(std::unique(topo.edges_.begin(), topo.edges_.end()), topo.edges_.end());

  for (auto [u, v] : topo.edges_) {
    topo.neighborhoods_[u].push_back(v);
    topo.neighborhoods_[v].push_back(u);
  }
  for (auto& nk : topo.neighborhoods_) std::sort(nk.begin(), nk.end());

  // union-find over the edge set
  std::vector<int> parent(n_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = n_nodes;
  for (auto [u, v] : topo.edges_) {
    int ru = find(u), rv = find(v);
    if (ru != rv) {
      parent[ru] = rv;
      --components;
    }
  }
  if (components != 1) {
    throw DisconnectedGraph("graph has " + std::to_string(components) + " components");
  }
  return topo;
}

NetworkTopology random_geometric_topology(int n_nodes, double radius, std::uint64_t seed,
                                          int max_attempts) {
  if (n_nodes < 1) throw InvalidEdge("topology needs at least one node");
  if (!(radius > 0.0) || radius > std::sqrt(2.0)) {
    throw InvalidRange("radius must lie in (0, sqrt(2)]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r2 = radius * radius;

  std::vector<double> x(n_nodes), y(n_nodes);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (int k = 0; k < n_nodes; ++k) {
      x[k] = unit(rng);
      y[k] = unit(rng);
    }
    std::vector<Edge> edges;
    for (int k = 0; k < n_nodes; ++k) {
      for (int l = k + 1; l < n_nodes; ++l) {
        const double dx = x[k] - x[l], dy = y[k] - y[l];
        if (dx * dx + dy * dy <= r2) edges.emplace_back(k, l);
      }
    }
    try {
      return build_topology(n_nodes, edges);
    } catch (const DisconnectedGraph&) {
    }
  }
  throw ConnectivityFailure("no connected placement within " + std::to_string(max_attempts) +
                            " attempts (n=" + std::to_string(n_nodes) +
                            ", radius=" + std::to_string(radius) + ")");
}

NetworkTopology path_topology(int n_nodes) {
  std::vector<Edge> edges;
  for (int k = 0; k + 1 < n_nodes; ++k) edges.emplace_back(k, k + 1);
  return build_topology(n_nodes, edges);
}

NetworkTopology complete_topology(int n_nodes) {
  std::vector<Edge> edges;
  for (int k = 0; k < n_nodes; ++k)
    for (int l = k + 1; l < n_nodes; ++l) edges.emplace_back(k, l);
  return build_topology(n_nodes, edges);
}

CombinationMatrix metropolis_weights(const NetworkTopology& topology) {
  const int n = topology.size();
  CombinationMatrix a = CombinationMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double off = 0.0;
    for (int l : topology.neighborhood(k)) {
      if (l == k) continue;
      const double w = 1.0 / std::max(topology.degree(k), topology.degree(l));
      a(l, k) = w;
      off += w;
    }
    a(k, k) = 1.0 - off;
  }
  return a;
}

CombinationReport validate_combination(const CombinationMatrix& weights,
                                       const NetworkTopology& topology, double tolerance) {
  CombinationReport report;
  const int n = topology.size();
  if (weights.rows() != n || weights.cols() != n) {
    report.nonnegative = report.columns_stochastic = report.sparsity = false;
    report.violations.push_back({CombinationViolation::Kind::Dimension, -1, -1,
                                 static_cast<double>(weights.rows())});
    return report;
  }
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double w = weights(l, k);
      if (w < 0.0) {
        report.nonnegative = false;
        report.violations.push_back({CombinationViolation::Kind::Negative, l, k, w});
      }
      if (w != 0.0 && !topology.adjacent(k, l)) {
        report.sparsity = false;
        report.violations.push_back({CombinationViolation::Kind::Sparsity, l, k, w});
      }
    }
    const double sum = weights.col(k).sum();
    if (std::abs(sum - 1.0) > tolerance) {
      report.columns_stochastic = false;
      report.violations.push_back({CombinationViolation::Kind::ColumnSum, -1, k, sum});
    }
  }
  return report;
}

void write_edge_list(std::ostream& out, const NetworkTopology& topology) {
  out << "N " << topology.size() << '\n';
  for (auto [u, v] : topology.edges()) out << (u + 1) << ' ' << (v + 1) << '\n';
}

NetworkTopology read_edge_list(std::istream& in) {
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string tag;
      if (!(ls >> tag >> n) || tag != "N" || n < 1) {
        throw ParseError("expected header 'N <count>'", line_no);
      }
      continue;
    }
    int u = 0, v = 0;
    std::string extra;
    if (!(ls >> u >> v) || (ls >> extra)) throw ParseError("expected 'u v' pair", line_no);
    edges.emplace_back(u - 1, v - 1);
  }
  if (n < 0) throw ParseError("missing 'N <count>' header");
  return build_topology(n, edges);
}

NetworkTopology load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

}  // namespace ebdiff
