#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biggat/graph.hpp"
#include "biggat/matrix.hpp"

namespace biggat {

inline constexpr int kFeatureDim = 11;

/// Duration class thresholds in hours: short < 48, 48 <= medium <= 144,
/// long > 144.
inline constexpr double kShortMaxHours = 48.0;
inline constexpr double kMediumMaxHours = 144.0;
/// An outage "recovers" when customers out first drops below this share of
/// customers served.
inline constexpr double kRecoveryFraction = 0.05;

enum class WindCategory { kNone = 0, kTs34 = 1, kTs50 = 2, kH64 = 3 };

WindCategory wind_from_string(const std::string& s);
std::string to_string(WindCategory w);

/// Parses "YYYY-MM-DDTHH:MM:SS[Z]" to hours since the Unix epoch.
double parse_iso8601_hours(const std::string& ts);
std::string format_iso8601(double hours_since_epoch);

struct DurationLabel {
  double duration_hours = 0.0;
  int clazz = 0;  // 0 short, 1 medium, 2 long
  bool censored = false;
};

/// Duration from the first global maximum of customers out to the first
/// subsequent sample below 5% of customers served. Series entries are
/// (hours since epoch, customers out) with strictly increasing times. A
/// series that never recovers is censored and labeled long; its duration is
/// the observed span after the peak.
DurationLabel label_duration(const std::vector<std::pair<double, double>>& series,
                             double customers_served);

int duration_class(double duration_hours);

struct CountyRecord {
  std::string fips;
  double population = 0.0;
  double area_sqkm = 0.0;
  std::array<double, 4> svi{};
};

/// Per-dimension transforms: log1p + z-score for the three count-like
/// feature dims (peak customers, population, area); identity for svi and
/// wind one-hot. Statistics come from training events only.
struct FeatureScaler {
  std::array<double, 3> mean{};
  std::array<double, 3> sd{};
  bool fitted = false;

  static FeatureScaler fit(std::span<const Mat* const> raw_feature_mats);
  std::array<double, kFeatureDim> apply_row(std::span<const double> raw_row) const;
  Mat apply(const Mat& raw) const;
};

/// Raw 11-dim feature row: [peak, population, area, svi x4, wind one-hot x4]
/// with one-hot order (none, ts34, ts50, h64).
std::array<double, kFeatureDim> raw_features(const CountyRecord& county,
                                             WindCategory wind, double peak_outages);

/// Scaled 11-dim feature vector for one county.
std::array<double, kFeatureDim> encode_features(const CountyRecord& county,
                                                WindCategory wind, double peak_outages,
                                                const FeatureScaler& scaler);

/// One hurricane's counties, graph, raw features and labels. clusters and
/// neighborhood_order are filled by the clustering and spatial-statistics
/// stages.
struct EventDataset {
  std::string event_id;
  Graph graph;
  Mat features;  // N x 11, raw (unscaled)
  std::vector<double> duration_hours;
  std::vector<bool> censored;
  std::vector<int> labels;    // duration classes 0..2
  std::vector<int> clusters;  // {1,2}; empty until assigned
  int neighborhood_order = 0; // 0 = not yet selected

  int size() const { return graph.size(); }
  /// Peak-outage feature column (the variable the spatial statistics use).
  std::vector<double> peak_values() const;
};

/// Loads one event from the four CSV files. The graph is the subgraph of the
/// adjacency list induced by the counties present in counties.csv for this
/// event. Missing wind rows default to `none`.
EventDataset load_event(const std::string& counties_csv, const std::string& adjacency_csv,
                        const std::string& wind_csv, const std::string& outages_csv,
                        const std::string& event_id);

/// Distinct event ids in counties.csv, in file order.
std::vector<std::string> list_event_ids(const std::string& counties_csv);

/// All undirected edges from adjacency.csv (fips_a, fips_b per row).
std::vector<std::pair<std::string, std::string>> load_adjacency(const std::string& path);

}  // namespace biggat
