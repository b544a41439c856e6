#include "biggat/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace biggat {

Graph::Graph(std::vector<std::string> node_ids,
             const std::vector<std::pair<std::string, std::string>>& edges) {
  if (node_ids.empty()) {
    throw std::invalid_argument("graph: node id list is empty");
  }
  std::sort(node_ids.begin(), node_ids.end());
  for (std::size_t i = 1; i < node_ids.size(); ++i) {
    if (node_ids[i] == node_ids[i - 1]) {
      throw std::invalid_argument("graph: duplicate node id '" + node_ids[i] + "'");
    }
  }
  ids_ = std::move(node_ids);
  n_ = static_cast<int>(ids_.size());
  index_.reserve(ids_.size());
  for (int i = 0; i < n_; ++i) {
    index_.emplace(ids_[i], i);
  }

  adj_.assign(static_cast<std::size_t>(n_) * n_, 0);
  for (const auto& [a, b] : edges) {
    auto ia = index_.find(a);
    auto ib = index_.find(b);
    if (ia == index_.end()) {
      throw std::invalid_argument("graph: edge references unknown id '" + a + "'");
    }
    if (ib == index_.end()) {
      throw std::invalid_argument("graph: edge references unknown id '" + b + "'");
    }
    if (ia->second == ib->second) {
      throw std::invalid_argument("graph: self-loop on '" + a + "'");
    }
    adj_[static_cast<std::size_t>(ia->second) * n_ + ib->second] = 1;
    adj_[static_cast<std::size_t>(ib->second) * n_ + ia->second] = 1;
  }

  nbr_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (adj_[static_cast<std::size_t>(i) * n_ + j]) {
        nbr_[i].push_back(j);
      }
    }
  }
}

int Graph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> shortest_path_distances(const Graph& g, int source) {
  if (source < 0 || source >= g.size()) {
    throw std::out_of_range("shortest_path_distances: source index out of range");
  }
  std::vector<int> dist(g.size(), kUnreachable);
  std::queue<int> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop();
    for (int u : g.neighbors(v)) {
      if (dist[u] == kUnreachable) {
        dist[u] = dist[v] + 1;
        frontier.push(u);
      }
    }
  }
  return dist;
}

bool HopMatrix::empty() const {
  return std::all_of(matrix.begin(), matrix.end(), [](std::uint8_t x) { return x == 0; });
}

// The n-hop indicator is computed from BFS distances rather than from matrix
// powers: the power-difference form picks up diagonal walk counts and can go
// negative for adjacent pairs, while the intended meaning is "exactly n-th
// order neighbor".
HopMatrix hop_adjacency(const Graph& g, int n) {
  if (n < 1) {
    throw std::invalid_argument("hop_adjacency: order must be >= 1");
  }
  HopMatrix h;
  h.order = n;
  h.n = g.size();
  h.matrix.assign(static_cast<std::size_t>(g.size()) * g.size(), 0);
  for (int v = 0; v < g.size(); ++v) {
    std::vector<int> dist = shortest_path_distances(g, v);
    for (int u = 0; u < g.size(); ++u) {
      if (dist[u] == n) {
        h.matrix[static_cast<std::size_t>(v) * g.size() + u] = 1;
      }
    }
  }
  return h;
}

std::vector<std::vector<int>> neighborhood_sets(const Graph& g, int n, bool include_self) {
  if (n < 1) {
    throw std::invalid_argument("neighborhood_sets: order must be >= 1");
  }
  std::vector<std::vector<int>> sets(g.size());
  for (int v = 0; v < g.size(); ++v) {
    std::vector<int> dist = shortest_path_distances(g, v);
    for (int u = 0; u < g.size(); ++u) {
      bool in_range = dist[u] != kUnreachable && dist[u] >= 1 && dist[u] <= n;
      if (in_range || (include_self && u == v)) {
        sets[v].push_back(u);
      }
    }
  }
  return sets;
}

}  // namespace biggat
