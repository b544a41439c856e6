#include "biggat/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "biggat/rng.hpp"

namespace biggat {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int nearest(const std::vector<std::vector<double>>& centroids, std::span<const double> p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    double d = sq_dist(centroids[c], p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

KMeansResult kmeans_fit(const std::vector<std::vector<double>>& points, int k,
                        std::uint64_t seed, int max_iter) {
  if (k < 1) {
    throw std::invalid_argument("kmeans: k must be >= 1");
  }
  if (points.empty()) {
    throw std::invalid_argument("kmeans: no points");
  }
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw std::invalid_argument("kmeans: points have mixed dimensions");
    }
  }
  std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (distinct.size() < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("kmeans: fewer distinct points than k");
  }

  // k-means++ seeding
  Rng rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.uniform_int(points.size())]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = sq_dist(centroids[0], points[i]);
      for (std::size_t c = 1; c < centroids.size(); ++c) {
        d = std::min(d, sq_dist(centroids[c], points[i]));
      }
      d2[i] = d;
      total += d;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        cum += d2[i];
        if (cum >= target) {
          pick = i;
          break;
        }
        pick = i;
      }
      // all remaining mass on duplicated centroids would give d2 == 0; the
      // distinct-points precondition rules that out
    }
    centroids.push_back(points[pick]);
  }

  KMeansResult res;
  res.centroids = std::move(centroids);
  res.assignments.assign(points.size(), 0);

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int c = nearest(res.centroids, points[i]);
      if (c != res.assignments[i]) {
        res.assignments[i] = c;
        changed = true;
      }
    }
    std::vector<std::vector<double>> sums(res.centroids.size(), std::vector<double>(dim, 0.0));
    std::vector<int> counts(res.centroids.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[res.assignments[i]];
      for (std::size_t j = 0; j < dim; ++j) {
        sums[res.assignments[i]][j] += points[i][j];
      }
    }
    for (std::size_t c = 0; c < res.centroids.size(); ++c) {
      if (counts[c] == 0) {
        continue;  // empty cluster keeps its centroid
      }
      for (std::size_t j = 0; j < dim; ++j) {
        res.centroids[c][j] = sums[c][j] / counts[c];
      }
    }
    if (!changed && iter > 0) {
      break;
    }
  }

  res.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    res.inertia += sq_dist(res.centroids[res.assignments[i]], points[i]);
  }
  return res;
}

ClusterModel ClusterModel::fit(const Mat& features, const std::vector<int>& labels,
                               std::uint64_t seed, int k) {
  if (features.rows == 0 || features.rows != static_cast<int>(labels.size())) {
    throw std::invalid_argument("cluster fit: features/labels mismatch or empty");
  }
  // Clustering vector: wind one-hot plus the duration class scaled to
  // {0, 0.5, 1} so it has the same range as the one-hot coordinates.
  std::vector<std::vector<double>> points(features.rows);
  for (int i = 0; i < features.rows; ++i) {
    auto row = features.row(i);
    std::vector<double> p(kWindDims + 1);
    for (int j = 0; j < kWindDims; ++j) {
      p[j] = row[kWindFeatureOffset + j];
    }
    if (labels[i] < 0 || labels[i] > 2) {
      throw std::invalid_argument("cluster fit: duration class out of range");
    }
    p[kWindDims] = 0.5 * labels[i];
    points[i] = std::move(p);
  }

  KMeansResult km = kmeans_fit(points, k, seed);

  // Canonical ordering: cluster 1 is the centroid with the largest duration
  // coordinate (full lexicographic comparison breaks exact ties).
  std::vector<int> order(km.centroids.size());
  for (std::size_t c = 0; c < order.size(); ++c) {
    order[c] = static_cast<int>(c);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (km.centroids[a][kWindDims] != km.centroids[b][kWindDims]) {
      return km.centroids[a][kWindDims] > km.centroids[b][kWindDims];
    }
    return km.centroids[a] > km.centroids[b];
  });
  std::vector<int> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = static_cast<int>(r);
  }

  ClusterModel model;
  model.seed_ = seed;
  model.centroids_.resize(km.centroids.size());
  for (std::size_t c = 0; c < km.centroids.size(); ++c) {
    model.centroids_[rank[c]] = km.centroids[c];
  }
  model.training_assignments_.resize(points.size());
  int flips = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    model.training_assignments_[i] = rank[km.assignments[i]] + 1;
    if (model.assign(features.row(static_cast<int>(i))) != model.training_assignments_[i]) {
      ++flips;
    }
  }
  model.flip_fraction_ = static_cast<double>(flips) / static_cast<double>(points.size());
  return model;
}

int ClusterModel::assign(std::span<const double> feature_row) const {
  if (!fitted()) {
    throw std::logic_error("cluster assign: model not fitted");
  }
  if (feature_row.size() < kWindFeatureOffset + kWindDims) {
    throw std::invalid_argument("cluster assign: feature row too short");
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids_.size(); ++c) {
    double d = 0.0;
    for (int j = 0; j < kWindDims; ++j) {
      double diff = feature_row[kWindFeatureOffset + j] - centroids_[c][j];
      d += diff * diff;
    }
    if (d < best_d) {  // strict: ties stay with the lower cluster label
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best + 1;
}

}  // namespace biggat
