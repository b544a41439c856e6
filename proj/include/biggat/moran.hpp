#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biggat/graph.hpp"

namespace biggat {

struct MoranResult {
  double statistic = 0.0;
  int order = 0;
  double z_score = 0.0;
  bool z_valid = false;  // false when the permutation distribution had zero variance
  double p_value = 1.0;
  int n_permutations = 0;
  std::uint64_t seed = 0;
};

/// Global Moran's I with a binary spatial weight matrix:
///   I = (N / W) * sum_ij w_ij (x_i - xbar)(x_j - xbar) / sum_i (x_i - xbar)^2
/// weights is row-major n*n, required symmetric with zero diagonal and at
/// least one nonzero entry; values must have nonzero variance.
double global_morans_i(std::span<const double> values,
                       const std::vector<std::uint8_t>& weights, int n);

/// Moran's I restricted to pairs at shortest-path distance exactly `order`.
/// Throws when no pair of nodes is at that order.
double nhop_morans_i(std::span<const double> values, const Graph& g, int order);

/// One-sided (upper tail) permutation test of the n-hop Moran's I.
///   p = (1 + #{permuted I >= observed I}) / (n_perm + 1)
/// The z-score is taken against the permutation distribution. Permutation i
/// derives its stream from (seed, i), so the result does not depend on
/// evaluation order. n_perm must be >= 99.
MoranResult permutation_significance(std::span<const double> values, const Graph& g,
                                     int order, int n_perm, std::uint64_t seed);

/// Largest order in [1, n_max] whose n-hop Moran's I is positive and
/// significant at level alpha; falls back to 1 when no order qualifies.
/// Orders with no pairs are treated as not significant.
int select_neighborhood_order(std::span<const double> values, const Graph& g,
                              int n_max, double alpha, int n_perm, std::uint64_t seed);

}  // namespace biggat
