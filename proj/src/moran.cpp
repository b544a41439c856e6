#include "biggat/moran.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "biggat/rng.hpp"

namespace biggat {

namespace {

// Moran's I over an explicit pair list; avoids rescanning the dense weight
// matrix for every permutation.
double morans_i_pairs(std::span<const double> values,
                      const std::vector<std::pair<int, int>>& pairs, double w_sum) {
  const int n = static_cast<int>(values.size());
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double denom = 0.0;
  for (double x : values) {
    denom += (x - mean) * (x - mean);
  }
  if (denom <= 0.0) {
    throw std::invalid_argument("morans_i: values have zero variance");
  }
  double num = 0.0;
  for (const auto& [i, j] : pairs) {
    num += (values[i] - mean) * (values[j] - mean);
  }
  return (n / w_sum) * (num / denom);
}

std::vector<std::pair<int, int>> weight_pairs(const std::vector<std::uint8_t>& weights, int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::uint8_t w = weights[static_cast<std::size_t>(i) * n + j];
      if (i == j && w != 0) {
        throw std::invalid_argument("morans_i: weight matrix has a nonzero diagonal");
      }
      if (w != weights[static_cast<std::size_t>(j) * n + i]) {
        throw std::invalid_argument("morans_i: weight matrix is not symmetric");
      }
      if (w != 0) {
        pairs.emplace_back(i, j);
      }
    }
  }
  return pairs;
}

}  // namespace

double global_morans_i(std::span<const double> values,
                       const std::vector<std::uint8_t>& weights, int n) {
  if (n < 2) {
    throw std::invalid_argument("morans_i: need at least two nodes");
  }
  if (static_cast<int>(values.size()) != n ||
      weights.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("morans_i: dimension mismatch");
  }
  auto pairs = weight_pairs(weights, n);
  if (pairs.empty()) {
    throw std::invalid_argument("morans_i: weight matrix is all zero");
  }
  return morans_i_pairs(values, pairs, static_cast<double>(pairs.size()));
}

double nhop_morans_i(std::span<const double> values, const Graph& g, int order) {
  HopMatrix hop = hop_adjacency(g, order);
  if (hop.empty()) {
    throw std::invalid_argument("nhop_morans_i: no " + std::to_string(order) +
                                "-th order pairs");
  }
  return global_morans_i(values, hop.matrix, g.size());
}

MoranResult permutation_significance(std::span<const double> values, const Graph& g,
                                     int order, int n_perm, std::uint64_t seed) {
  if (n_perm < 99) {
    throw std::invalid_argument("permutation_significance: n_perm must be >= 99");
  }
  HopMatrix hop = hop_adjacency(g, order);
  if (hop.empty()) {
    throw std::invalid_argument("permutation_significance: no " +
                                std::to_string(order) + "-th order pairs");
  }
  auto pairs = weight_pairs(hop.matrix, g.size());
  const double w_sum = static_cast<double>(pairs.size());

  MoranResult res;
  res.order = order;
  res.n_permutations = n_perm;
  res.seed = seed;
  res.statistic = morans_i_pairs(values, pairs, w_sum);

  Rng root(seed);
  std::vector<double> permuted(values.begin(), values.end());
  int count_ge = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n_perm; ++i) {
    std::copy(values.begin(), values.end(), permuted.begin());
    Rng stream = root.fork(static_cast<std::uint64_t>(i));
    stream.shuffle(permuted);
    double stat = morans_i_pairs(permuted, pairs, w_sum);
    if (stat >= res.statistic) {
      ++count_ge;
    }
    sum += stat;
    sum_sq += stat * stat;
  }
  res.p_value = (1.0 + count_ge) / (n_perm + 1.0);
  double mean = sum / n_perm;
  double var = sum_sq / n_perm - mean * mean;
  if (var > 0.0) {
    res.z_score = (res.statistic - mean) / std::sqrt(var);
    res.z_valid = true;
  }
  return res;
}

int select_neighborhood_order(std::span<const double> values, const Graph& g,
                              int n_max, double alpha, int n_perm, std::uint64_t seed) {
  if (n_max < 1) {
    throw std::invalid_argument("select_neighborhood_order: n_max must be >= 1");
  }
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw std::invalid_argument("select_neighborhood_order: alpha must lie in (0, 1)");
  }
  int best = 1;  // the model always needs a nonempty neighborhood
  for (int order = 1; order <= n_max; ++order) {
    if (hop_adjacency(g, order).empty()) {
      continue;  // no pairs at this order, cannot be significant
    }
    MoranResult r = permutation_significance(values, g, order, n_perm, seed);
    if (r.p_value <= alpha && r.statistic > 0.0) {
      best = order;
    }
  }
  return best;
}

}  // namespace biggat
