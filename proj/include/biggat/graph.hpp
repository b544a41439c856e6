#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace biggat {

inline constexpr int kUnreachable = -1;

/// Undirected county contiguity graph. Node order is the lexicographic order
/// of the county identifiers, fixed at construction, so every matrix derived
/// from a Graph is reproducible across runs. Immutable once built.
class Graph {
 public:
  /// Builds a validated graph. Edges are symmetrized: (a,b) sets both
  /// directions. Throws std::invalid_argument on duplicate ids, edges naming
  /// unknown ids, or self-loops.
  Graph(std::vector<std::string> node_ids,
        const std::vector<std::pair<std::string, std::string>>& edges);

  int size() const { return n_; }
  const std::vector<std::string>& node_ids() const { return ids_; }
  /// Index of an id in node order, or -1 when absent.
  int index_of(const std::string& id) const;

  bool adjacent(int i, int j) const { return adj_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  const std::vector<int>& neighbors(int v) const { return nbr_[v]; }
  /// Row-major N*N binary adjacency.
  const std::vector<std::uint8_t>& adjacency() const { return adj_; }

 private:
  int n_ = 0;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::uint8_t> adj_;
  std::vector<std::vector<int>> nbr_;
};

/// BFS distances from source; unreachable nodes get kUnreachable.
/// Throws std::out_of_range when source is not a valid index.
std::vector<int> shortest_path_distances(const Graph& g, int source);

/// Binary indicator of pairs at shortest-path distance exactly `order`.
struct HopMatrix {
  int order = 0;
  int n = 0;
  std::vector<std::uint8_t> matrix;  // row-major n*n

  bool at(int i, int j) const { return matrix[static_cast<std::size_t>(i) * n + j] != 0; }
  /// True when no pair of nodes is at this hop order.
  bool empty() const;
};

/// Pairs at shortest-path distance exactly n (symmetric, zero diagonal).
/// Throws std::invalid_argument when n < 1.
HopMatrix hop_adjacency(const Graph& g, int n);

/// For each node, the sorted indices of nodes at distance 1..n, plus the node
/// itself when include_self is set. Throws std::invalid_argument when n < 1.
std::vector<std::vector<int>> neighborhood_sets(const Graph& g, int n, bool include_self);

}  // namespace biggat
