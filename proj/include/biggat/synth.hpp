#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "biggat/data.hpp"

namespace biggat {

/// Configuration for one synthetic storm event over a rectangular window of
/// a global rook-adjacency county grid. The latent severity field is
/// wind effect + svi effect + a Gaussian field whose covariance is nonzero
/// exactly on hop orders 1..correlation_order, so the spatial correlation
/// range of the generated data is known by construction. Peak outages and
/// duration are monotone in severity; obs_noise perturbs only the reported
/// outage magnitude, never the duration labels.
struct EventGenConfig {
  std::string event_id = "ev01";
  int rows = 10;
  int cols = 10;
  int row0 = 0;  // window offset within the global grid
  int col0 = 0;
  int global_cols = 10;  // county numbering stride
  // storm track segment endpoints in window coordinates
  double track_r0 = 0.0, track_c0 = 0.0, track_r1 = 9.0, track_c1 = 9.0;
  // wind band radii in cells; strictly decreasing for higher categories
  double r34 = 6.0, r50 = 4.0, r64 = 2.0;
  int correlation_order = 3;
  double noise_scale = 1.0;
  double wind_weight = 0.6;
  double svi_weight = 0.4;
  double obs_noise = 0.25;        // log-scale noise on reported peak outages
  double population_sigma = 0.5;  // log-scale spread of county populations
  // target class proportions (short, medium, long); need not be normalized
  std::array<double, 3> class_mix{0.70, 0.18, 0.12};
  std::uint64_t seed = 0;
  std::uint64_t attr_seed = 0;  // stream for county attributes (shared across events)
  double base_time_hours = 443568.0;  // 2020-08-04T00:00:00Z
};

/// One generated event with everything needed to emit the CSV schemas.
struct SynthEvent {
  EventDataset dataset;
  std::vector<CountyRecord> counties;                           // node order
  std::vector<WindCategory> wind;                               // node order
  std::vector<double> customers_served;                         // node order
  std::vector<std::vector<std::pair<double, double>>> series;   // node order
};

SynthEvent generate_synthetic_event(const EventGenConfig& cfg);

/// Convenience wrapper returning only the dataset.
EventDataset generate_synthetic_dataset(const EventGenConfig& cfg);

/// Multi-event suite configuration. Windows overlap but are offset so the
/// leave-one-event-out split has both shared and unseen counties.
struct SynthConfig {
  int n_events = 6;
  int global_rows = 16;
  int global_cols = 16;
  int window_rows = 10;
  int window_cols = 10;
  int correlation_order = 3;
  double noise_scale = 1.0;
  double wind_weight = 0.6;
  double svi_weight = 0.4;
  double obs_noise = 0.25;
  double population_sigma = 0.5;
  double r34 = 6.0, r50 = 4.0, r64 = 2.0;
  bool mix_override = false;
  std::array<double, 3> class_mix{0.70, 0.18, 0.12};  // used when mix_override
  std::uint64_t seed = 0;
};

struct SynthSuite {
  std::vector<SynthEvent> events;
  int global_rows = 0;
  int global_cols = 0;
};

SynthSuite generate_synthetic_suite(const SynthConfig& cfg);

/// Zero-padded county id for a global grid cell.
std::string grid_fips(int row, int col, int global_cols);

/// Rook-adjacency edge list over a full grid.
std::vector<std::pair<std::string, std::string>> grid_adjacency(int rows, int cols);

/// Writes counties.csv, adjacency.csv, wind.csv and outages.csv under dir.
/// Existing files are only replaced when force is set.
void write_suite(const SynthSuite& suite, const std::string& dir, bool force);

}  // namespace biggat
