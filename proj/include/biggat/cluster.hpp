#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "biggat/matrix.hpp"

namespace biggat {

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  int iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeding. Nearest-centroid ties go to the
/// lowest centroid index. Throws when there are fewer distinct points than k.
KMeansResult kmeans_fit(const std::vector<std::vector<double>>& points, int k,
                        std::uint64_t seed, int max_iter = 100);

// Feature layout used by the cluster model (matches EventDataset features):
// [0] peak customers, [1] population, [2] area, [3..6] svi, [7..10] wind one-hot.
inline constexpr int kWindFeatureOffset = 7;
inline constexpr int kWindDims = 4;

/// Two-group structure over (wind swath, duration class) that fixes which
/// embedding weights a node uses. Fitting clusters the training nodes on
/// [wind one-hot (4) || duration class scaled to {0, 0.5, 1}]; at prediction
/// time the duration is unknown, so assignment uses the wind coordinates only.
class ClusterModel {
 public:
  /// features: N x 11 raw feature rows; labels: duration classes {0,1,2}.
  static ClusterModel fit(const Mat& features, const std::vector<int>& labels,
                          std::uint64_t seed, int k = 2);

  /// Cluster label in {1..k} from the wind block of an 11-dim feature row.
  /// Distance ties resolve to the lower cluster label.
  int assign(std::span<const double> feature_row) const;

  bool fitted() const { return !centroids_.empty(); }
  int k() const { return static_cast<int>(centroids_.size()); }
  /// Centroids in the 5-dim clustering space, ordered so cluster 1 has the
  /// largest duration coordinate.
  const std::vector<std::vector<double>>& centroids() const { return centroids_; }
  /// Training assignments in {1..k}, aligned with the fitting rows.
  const std::vector<int>& training_assignments() const { return training_assignments_; }
  /// Fraction of training nodes whose wind-only assignment differs from the
  /// stored full-space assignment (the duration coordinate was decisive).
  double training_flip_fraction() const { return flip_fraction_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<std::vector<double>> centroids_;
  std::vector<int> training_assignments_;
  double flip_fraction_ = 0.0;
  std::uint64_t seed_ = 0;
};

}  // namespace biggat
