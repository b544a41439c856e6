#include "biggat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "biggat/rng.hpp"

namespace biggat {

namespace {

double point_segment_distance(double pr, double pc, double r0, double c0, double r1,
                              double c1) {
  double dr = r1 - r0, dc = c1 - c0;
  double len2 = dr * dr + dc * dc;
  double t = len2 > 0.0 ? ((pr - r0) * dr + (pc - c0) * dc) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  double qr = r0 + t * dr, qc = c0 + t * dc;
  return std::hypot(pr - qr, pc - qc);
}

// Lower Cholesky factor of a symmetric positive definite matrix.
std::vector<double> cholesky(const std::vector<double>& a, int n) {
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k) {
        s -= l[static_cast<std::size_t>(i) * n + k] * l[static_cast<std::size_t>(j) * n + k];
      }
      if (i == j) {
        if (s <= 0.0) {
          throw std::runtime_error("synthetic field covariance is not positive definite");
        }
        l[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
      } else {
        l[static_cast<std::size_t>(i) * n + j] = s / l[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  return l;
}

// Gaussian field with covariance I + sum_j rho_j * Hop_j: correlation is
// nonzero exactly on hop orders 1..correlation_order.
std::vector<double> correlated_field(const Graph& g, int correlation_order,
                                     double scale, Rng& rng) {
  const int n = g.size();
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) {
    z[i] = rng.normal();
  }
  if (correlation_order < 1 || n < 2) {
    for (double& v : z) {
      v *= scale;
    }
    return z;
  }

  std::vector<HopMatrix> hops;
  for (int j = 1; j <= correlation_order; ++j) {
    hops.push_back(hop_adjacency(g, j));
  }
  std::vector<double> rho(hops.size());
  for (std::size_t j = 0; j < hops.size(); ++j) {
    rho[j] = 0.55 * std::pow(0.55, static_cast<double>(j));
  }
  // keep the covariance strictly diagonally dominant
  double worst_row = 0.0;
  for (int v = 0; v < n; ++v) {
    double row = 0.0;
    for (std::size_t j = 0; j < hops.size(); ++j) {
      int ring = 0;
      for (int u = 0; u < n; ++u) {
        ring += hops[j].at(v, u) ? 1 : 0;
      }
      row += rho[j] * ring;
    }
    worst_row = std::max(worst_row, row);
  }
  if (worst_row >= 0.90) {
    for (double& r : rho) {
      r *= 0.90 / worst_row;
    }
  }

  std::vector<double> cov(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    cov[static_cast<std::size_t>(i) * n + i] = 1.0;
  }
  for (std::size_t j = 0; j < hops.size(); ++j) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (hops[j].at(a, b)) {
          cov[static_cast<std::size_t>(a) * n + b] += rho[j];
        }
      }
    }
  }
  std::vector<double> l = cholesky(cov, n);
  std::vector<double> field(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k <= i; ++k) {
      s += l[static_cast<std::size_t>(i) * n + k] * z[k];
    }
    field[i] = scale * s;
  }
  return field;
}

double round_to_seconds(double hours) {
  return static_cast<double>(std::llround(hours * 3600.0)) / 3600.0;
}

// Piecewise-linear monotone map from calibrated severity (class thresholds at
// 0 and 1) to duration hours, kept clear of the 48 h / 144 h boundaries.
double duration_from_severity(double s, double s_min, double s_max) {
  if (s < 0.0) {
    double lo = std::min(s_min, -1e-9);
    return 6.0 + (46.0 - 6.0) * (s - lo) / (0.0 - lo);
  }
  if (s <= 1.0) {
    return 50.0 + (142.0 - 50.0) * s;
  }
  double hi = std::max(s_max, 1.0 + 1e-9);
  return 148.0 + (320.0 - 148.0) * (s - 1.0) / (hi - 1.0);
}

}  // namespace

std::string grid_fips(int row, int col, int global_cols) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", row * global_cols + col);
  return buf;
}

std::vector<std::pair<std::string, std::string>> grid_adjacency(int rows, int cols) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        edges.emplace_back(grid_fips(r, c, cols), grid_fips(r, c + 1, cols));
      }
      if (r + 1 < rows) {
        edges.emplace_back(grid_fips(r, c, cols), grid_fips(r + 1, c, cols));
      }
    }
  }
  return edges;
}

SynthEvent generate_synthetic_event(const EventGenConfig& cfg) {
  if (cfg.rows < 4 || cfg.cols < 4) {
    throw std::invalid_argument("synthetic event: grid must be at least 4x4");
  }
  if (!(cfg.r64 < cfg.r50 && cfg.r50 < cfg.r34) || cfg.r64 <= 0.0) {
    throw std::invalid_argument(
        "synthetic event: wind radii must be strictly decreasing for higher categories");
  }
  if (cfg.correlation_order < 0) {
    throw std::invalid_argument("synthetic event: correlation order must be >= 0");
  }
  double mix_total = cfg.class_mix[0] + cfg.class_mix[1] + cfg.class_mix[2];
  if (mix_total <= 0.0 || cfg.class_mix[0] < 0 || cfg.class_mix[1] < 0 ||
      cfg.class_mix[2] < 0) {
    throw std::invalid_argument("synthetic event: invalid class mix");
  }

  const int n = cfg.rows * cfg.cols;

  // window cells in node order: the zero-padded global ids sort row-major
  std::vector<std::string> fips(n);
  std::vector<std::pair<int, int>> cell(n);
  {
    int i = 0;
    for (int r = 0; r < cfg.rows; ++r) {
      for (int c = 0; c < cfg.cols; ++c, ++i) {
        fips[i] = grid_fips(cfg.row0 + r, cfg.col0 + c, cfg.global_cols);
        cell[i] = {r, c};
      }
    }
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i) {
    auto [r, c] = cell[i];
    if (c + 1 < cfg.cols) {
      edges.emplace_back(fips[i], fips[i + 1]);
    }
    if (r + 1 < cfg.rows) {
      edges.emplace_back(fips[i], fips[i + cfg.cols]);
    }
  }
  Graph graph(std::move(fips), edges);

  // county attributes from a stream keyed by the global cell index, so
  // overlapping event windows agree on shared counties
  Rng attr_root(cfg.attr_seed);
  std::vector<CountyRecord> counties(n);
  for (int v = 0; v < n; ++v) {
    auto [r, c] = cell[v];
    int gidx = (cfg.row0 + r) * cfg.global_cols + (cfg.col0 + c);
    Rng s = attr_root.fork(static_cast<std::uint64_t>(gidx));
    CountyRecord rec;
    rec.fips = graph.node_ids()[v];
    rec.population = std::round(std::clamp(std::exp(9.8 + 0.9 * s.normal()), 400.0, 3.0e6));
    rec.area_sqkm = std::round(std::exp(6.3 + 0.6 * s.normal()) * 1000.0) / 1000.0;
    for (int j = 0; j < 4; ++j) {
      rec.svi[j] = std::round(s.uniform() * 1e6) / 1e6;
    }
    counties[v] = rec;
  }

  // wind bands by distance from the storm track
  std::vector<WindCategory> wind(n, WindCategory::kNone);
  for (int v = 0; v < n; ++v) {
    auto [r, c] = cell[v];
    double d = point_segment_distance(r, c, cfg.track_r0, cfg.track_c0, cfg.track_r1,
                                      cfg.track_c1);
    if (d <= cfg.r64) {
      wind[v] = WindCategory::kH64;
    } else if (d <= cfg.r50) {
      wind[v] = WindCategory::kTs50;
    } else if (d <= cfg.r34) {
      wind[v] = WindCategory::kTs34;
    }
  }

  // latent severity
  Rng event_rng(cfg.seed);
  Rng noise_stream = event_rng.fork(1);
  std::vector<double> severity = correlated_field(graph, cfg.correlation_order,
                                                  cfg.noise_scale, noise_stream);
  for (int v = 0; v < n; ++v) {
    double svi_mean = std::accumulate(counties[v].svi.begin(), counties[v].svi.end(), 0.0) / 4.0;
    severity[v] += cfg.wind_weight * static_cast<double>(wind[v]) +
                   cfg.svi_weight * (svi_mean - 0.5) * 2.0;
  }

  // calibrate the severity scale so the fixed duration map hits the target
  // class proportions: thresholds land at severity 0 and 1
  std::vector<double> sorted(severity);
  std::sort(sorted.begin(), sorted.end());
  double p0 = cfg.class_mix[0] / mix_total;
  double p1 = cfg.class_mix[1] / mix_total;
  int idx1 = static_cast<int>(std::llround(p0 * n));
  int idx2 = static_cast<int>(std::llround((p0 + p1) * n));
  idx1 = std::clamp(idx1, 0, n);
  idx2 = std::clamp(idx2, idx1, n);
  double q1 = idx1 <= 0 ? sorted.front() - 1.0
              : idx1 >= n ? sorted.back() + 1.0
                          : 0.5 * (sorted[idx1 - 1] + sorted[idx1]);
  double q2 = idx2 <= 0 ? sorted.front() - 1.0
              : idx2 >= n ? sorted.back() + 1.0
                          : 0.5 * (sorted[idx2 - 1] + sorted[idx2]);
  if (q2 - q1 < 1e-9) {
    q2 = q1 + 1e-9;
  }
  double s_min = 0.0, s_max = 1.0;
  for (double& s : severity) {
    s = (s - q1) / (q2 - q1);
    s_min = std::min(s_min, s);
    s_max = std::max(s_max, s);
  }

  // outage magnitude and duration, both monotone in severity
  SynthEvent ev{EventDataset{cfg.event_id, std::move(graph), Mat(n, kFeatureDim),
                             std::vector<double>(n), std::vector<bool>(n),
                             std::vector<int>(n), {}, 0},
                std::move(counties), std::move(wind), std::vector<double>(n), {}};
  ev.series.resize(n);
  Rng time_stream = event_rng.fork(2);
  for (int v = 0; v < n; ++v) {
    double served = std::max(200.0, std::round(0.45 * ev.counties[v].population));
    ev.customers_served[v] = served;
    double frac = 0.07 + 0.88 / (1.0 + std::exp(-1.5 * (severity[v] - 0.5)));
    double peak = std::max(1.0, std::round(served * frac));
    double duration = round_to_seconds(duration_from_severity(severity[v], s_min, s_max));
    double t_peak = cfg.base_time_hours + static_cast<double>(time_stream.uniform_int(13));
    double threshold = kRecoveryFraction * served;

    auto& ts = ev.series[v];
    ts.emplace_back(t_peak - 3.0, std::round(0.35 * peak));
    ts.emplace_back(t_peak - 1.0, std::round(0.75 * peak));
    ts.emplace_back(t_peak, peak);
    double step = duration <= 72.0 ? 1.0 : 3.0;
    for (double t = step; t < duration - 0.01; t += step) {
      double rem = 1.0 - t / duration;
      double value = std::round(threshold + (peak - threshold) * std::pow(rem, 1.3));
      value = std::max(value, std::ceil(threshold + 1.0));
      value = std::min(value, peak - 1.0);
      ts.emplace_back(t_peak + t, value);
    }
    ts.emplace_back(t_peak + duration, std::round(0.6 * threshold));
    ts.emplace_back(t_peak + duration + 2.0, std::round(0.3 * threshold));

    DurationLabel lab = label_duration(ts, served);
    ev.dataset.duration_hours[v] = lab.duration_hours;
    ev.dataset.censored[v] = lab.censored;
    ev.dataset.labels[v] = lab.clazz;
    auto f = raw_features(ev.counties[v], ev.wind[v], peak);
    std::copy(f.begin(), f.end(), ev.dataset.features.row(v).begin());
  }
  return ev;
}

EventDataset generate_synthetic_dataset(const EventGenConfig& cfg) {
  return generate_synthetic_event(cfg).dataset;
}

SynthSuite generate_synthetic_suite(const SynthConfig& cfg) {
  if (cfg.n_events < 1) {
    throw std::invalid_argument("synthetic suite: need at least one event");
  }
  if (cfg.window_rows > cfg.global_rows || cfg.window_cols > cfg.global_cols) {
    throw std::invalid_argument("synthetic suite: window larger than the grid");
  }
  // class mixes shaped like the observed per-event imbalance of large
  // hurricane outage datasets (heavy short class, thin long tail)
  static const std::array<std::array<double, 3>, 6> kMixes = {{
      {0.69, 0.22, 0.09},
      {0.50, 0.41, 0.09},
      {0.68, 0.16, 0.16},
      {0.72, 0.18, 0.10},
      {0.82, 0.14, 0.04},
      {0.76, 0.19, 0.05},
  }};

  Rng root(cfg.seed);
  SynthSuite suite;
  suite.global_rows = cfg.global_rows;
  suite.global_cols = cfg.global_cols;
  const int max_r0 = cfg.global_rows - cfg.window_rows;
  const int max_c0 = cfg.global_cols - cfg.window_cols;
  for (int e = 0; e < cfg.n_events; ++e) {
    Rng er = root.fork(0x5eed0000ULL + static_cast<std::uint64_t>(e));
    EventGenConfig ec;
    char name[16];
    std::snprintf(name, sizeof(name), "ev%02d", e + 1);
    ec.event_id = name;
    ec.rows = cfg.window_rows;
    ec.cols = cfg.window_cols;
    ec.row0 = max_r0 > 0 ? static_cast<int>(er.uniform_int(max_r0 + 1)) : 0;
    ec.col0 = max_c0 > 0 ? static_cast<int>(er.uniform_int(max_c0 + 1)) : 0;
    ec.global_cols = cfg.global_cols;
    // a track crossing the window, alternating orientation
    if (e % 2 == 0) {
      ec.track_r0 = -1.0;
      ec.track_c0 = er.uniform(0.0, cfg.window_cols - 1.0);
      ec.track_r1 = cfg.window_rows;
      ec.track_c1 = er.uniform(0.0, cfg.window_cols - 1.0);
    } else {
      ec.track_c0 = -1.0;
      ec.track_r0 = er.uniform(0.0, cfg.window_rows - 1.0);
      ec.track_c1 = cfg.window_cols;
      ec.track_r1 = er.uniform(0.0, cfg.window_rows - 1.0);
    }
    ec.r34 = cfg.r34;
    ec.r50 = cfg.r50;
    ec.r64 = cfg.r64;
    ec.correlation_order = cfg.correlation_order;
    ec.noise_scale = cfg.noise_scale;
    ec.wind_weight = cfg.wind_weight;
    ec.svi_weight = cfg.svi_weight;
    ec.class_mix = cfg.mix_override ? cfg.class_mix : kMixes[e % kMixes.size()];
    ec.seed = er.next_u64();
    ec.attr_seed = root.fork(0xa77c0de5ULL).next_u64();
    ec.base_time_hours += 72.0 * e;
    suite.events.push_back(generate_synthetic_event(ec));
  }
  return suite;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p, bool force) {
  if (!force && std::filesystem::exists(p)) {
    throw std::runtime_error("refusing to overwrite '" + p.string() +
                             "' without --force");
  }
  std::ofstream out(p);
  if (!out) {
    throw std::runtime_error("cannot write '" + p.string() + "'");
  }
  return out;
}

}  // namespace

void write_suite(const SynthSuite& suite, const std::string& dir, bool force) {
  std::filesystem::path root(dir);
  std::filesystem::create_directories(root);

  auto counties = open_out(root / "counties.csv", force);
  counties << "event_id,fips,population,area_sqkm,svi_1,svi_2,svi_3,svi_4\n";
  char buf[256];
  for (const SynthEvent& ev : suite.events) {
    for (const CountyRecord& c : ev.counties) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%.0f,%.3f,%.6f,%.6f,%.6f,%.6f\n",
                    ev.dataset.event_id.c_str(), c.fips.c_str(), c.population,
                    c.area_sqkm, c.svi[0], c.svi[1], c.svi[2], c.svi[3]);
      counties << buf;
    }
  }

  auto adjacency = open_out(root / "adjacency.csv", force);
  adjacency << "fips_a,fips_b\n";
  for (const auto& [a, b] : grid_adjacency(suite.global_rows, suite.global_cols)) {
    adjacency << a << ',' << b << '\n';
  }

  auto wind = open_out(root / "wind.csv", force);
  wind << "event_id,fips,wind_category\n";
  for (const SynthEvent& ev : suite.events) {
    for (int v = 0; v < ev.dataset.size(); ++v) {
      if (ev.wind[v] != WindCategory::kNone) {
        wind << ev.dataset.event_id << ',' << ev.counties[v].fips << ','
             << to_string(ev.wind[v]) << '\n';
      }
    }
  }

  auto outages = open_out(root / "outages.csv", force);
  outages << "event_id,fips,timestamp_utc,customers_out,customers_served\n";
  for (const SynthEvent& ev : suite.events) {
    for (int v = 0; v < ev.dataset.size(); ++v) {
      for (const auto& [t, out] : ev.series[v]) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.0f,%.0f\n",
                      ev.dataset.event_id.c_str(), ev.counties[v].fips.c_str(),
                      format_iso8601(t).c_str(), out, ev.customers_served[v]);
        outages << buf;
      }
    }
  }
}

}  // namespace biggat
