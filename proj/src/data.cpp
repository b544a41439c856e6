#include "biggat/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace biggat {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    out.push_back("");
  }
  return out;
}

// Minimal strict CSV table: header row required, every record must match the
// header width. Fields never contain commas in these schemas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string path;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        return static_cast<int>(i);
      }
    }
    throw std::runtime_error(path + ": missing required column '" + name + "'");
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  CsvTable t;
  t.path = path;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file");
  }
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(t.header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

double to_number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": invalid number '" + s + "'");
  }
}

// days since 1970-01-01 for a proleptic Gregorian date
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<long>(era) * 146097L + static_cast<long>(doe) - 719468L;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468L;
  const long era = (z >= 0 ? z : z - 146096L) / 146097L;
  const unsigned doe = static_cast<unsigned>(z - era * 146097L);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yy = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

WindCategory wind_from_string(const std::string& s) {
  if (s == "none") return WindCategory::kNone;
  if (s == "ts34") return WindCategory::kTs34;
  if (s == "ts50") return WindCategory::kTs50;
  if (s == "h64") return WindCategory::kH64;
  throw std::invalid_argument("unknown wind category '" + s +
                              "' (expected none|ts34|ts50|h64)");
}

std::string to_string(WindCategory w) {
  switch (w) {
    case WindCategory::kNone: return "none";
    case WindCategory::kTs34: return "ts34";
    case WindCategory::kTs50: return "ts50";
    case WindCategory::kH64: return "h64";
  }
  return "none";
}

double parse_iso8601_hours(const std::string& ts) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail = '\0';
  int n = std::sscanf(ts.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &tail);
  bool ok = (n == 6) || (n == 7 && tail == 'Z');
  if (!ok || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
    throw std::invalid_argument("invalid ISO-8601 timestamp '" + ts + "'");
  }
  long days = days_from_civil(y, mo, d);
  double seconds = static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + s;
  return seconds / 3600.0;
}

std::string format_iso8601(double hours_since_epoch) {
  long long total_s = static_cast<long long>(std::llround(hours_since_epoch * 3600.0));
  long days = static_cast<long>(total_s / 86400);
  long rem = static_cast<long>(total_s % 86400);
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02ld:%02ld:%02ldZ", y, m, d,
                rem / 3600, (rem % 3600) / 60, rem % 60);
  return buf;
}

DurationLabel label_duration(const std::vector<std::pair<double, double>>& series,
                             double customers_served) {
  if (series.empty()) {
    throw std::invalid_argument("label_duration: empty series");
  }
  if (customers_served <= 0.0) {
    throw std::invalid_argument("label_duration: customers_served must be positive");
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].first <= series[i - 1].first) {
      throw std::invalid_argument("label_duration: timestamps not strictly increasing");
    }
  }
  // first global maximum
  std::size_t peak = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].second > series[peak].second) {
      peak = i;
    }
  }
  const double threshold = kRecoveryFraction * customers_served;
  DurationLabel out;
  for (std::size_t i = peak + 1; i < series.size(); ++i) {
    if (series[i].second < threshold) {
      out.duration_hours = series[i].first - series[peak].first;
      out.clazz = duration_class(out.duration_hours);
      return out;
    }
  }
  // never recovered within the record: at least the observed span
  out.censored = true;
  out.duration_hours = series.back().first - series[peak].first;
  out.clazz = 2;
  return out;
}

int duration_class(double duration_hours) {
  if (duration_hours < kShortMaxHours) {
    return 0;
  }
  if (duration_hours <= kMediumMaxHours) {
    return 1;
  }
  return 2;
}

FeatureScaler FeatureScaler::fit(std::span<const Mat* const> raw_feature_mats) {
  FeatureScaler sc;
  long n = 0;
  std::array<double, 3> sum{};
  for (const Mat* m : raw_feature_mats) {
    for (int i = 0; i < m->rows; ++i) {
      for (int d = 0; d < 3; ++d) {
        sum[d] += std::log1p((*m)(i, d));
      }
    }
    n += m->rows;
  }
  if (n == 0) {
    throw std::invalid_argument("feature scaler: no training rows");
  }
  for (int d = 0; d < 3; ++d) {
    sc.mean[d] = sum[d] / static_cast<double>(n);
  }
  std::array<double, 3> ss{};
  for (const Mat* m : raw_feature_mats) {
    for (int i = 0; i < m->rows; ++i) {
      for (int d = 0; d < 3; ++d) {
        double c = std::log1p((*m)(i, d)) - sc.mean[d];
        ss[d] += c * c;
      }
    }
  }
  for (int d = 0; d < 3; ++d) {
    double var = ss[d] / static_cast<double>(n);
    sc.sd[d] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  sc.fitted = true;
  return sc;
}

std::array<double, kFeatureDim> FeatureScaler::apply_row(
    std::span<const double> raw_row) const {
  if (!fitted) {
    throw std::logic_error("feature scaler: not fitted");
  }
  if (raw_row.size() != kFeatureDim) {
    throw std::invalid_argument("feature scaler: expected an 11-dim row");
  }
  std::array<double, kFeatureDim> out{};
  for (int d = 0; d < 3; ++d) {
    out[d] = (std::log1p(raw_row[d]) - mean[d]) / sd[d];
  }
  for (int d = 3; d < kFeatureDim; ++d) {
    out[d] = raw_row[d];
  }
  return out;
}

Mat FeatureScaler::apply(const Mat& raw) const {
  Mat out(raw.rows, raw.cols);
  for (int i = 0; i < raw.rows; ++i) {
    auto scaled = apply_row(raw.row(i));
    std::copy(scaled.begin(), scaled.end(), out.row(i).begin());
  }
  return out;
}

std::array<double, kFeatureDim> raw_features(const CountyRecord& county,
                                             WindCategory wind, double peak_outages) {
  std::array<double, kFeatureDim> f{};
  f[0] = peak_outages;
  f[1] = county.population;
  f[2] = county.area_sqkm;
  for (int i = 0; i < 4; ++i) {
    f[3 + i] = county.svi[i];
  }
  f[7 + static_cast<int>(wind)] = 1.0;
  return f;
}

std::array<double, kFeatureDim> encode_features(const CountyRecord& county,
                                                WindCategory wind, double peak_outages,
                                                const FeatureScaler& scaler) {
  auto raw = raw_features(county, wind, peak_outages);
  return scaler.apply_row(raw);
}

std::vector<double> EventDataset::peak_values() const {
  std::vector<double> out(features.rows);
  for (int i = 0; i < features.rows; ++i) {
    out[i] = features(i, 0);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> load_adjacency(const std::string& path) {
  CsvTable t = read_csv(path);
  int ca = t.column("fips_a");
  int cb = t.column("fips_b");
  std::vector<std::pair<std::string, std::string>> edges;
  edges.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    edges.emplace_back(row[ca], row[cb]);
  }
  return edges;
}

std::vector<std::string> list_event_ids(const std::string& counties_csv) {
  CsvTable t = read_csv(counties_csv);
  int ce = t.column("event_id");
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    if (seen.insert(row[ce]).second) {
      ids.push_back(row[ce]);
    }
  }
  return ids;
}

EventDataset load_event(const std::string& counties_csv, const std::string& adjacency_csv,
                        const std::string& wind_csv, const std::string& outages_csv,
                        const std::string& event_id) {
  CsvTable counties = read_csv(counties_csv);
  int c_ev = counties.column("event_id");
  int c_fips = counties.column("fips");
  int c_pop = counties.column("population");
  int c_area = counties.column("area_sqkm");
  std::array<int, 4> c_svi{counties.column("svi_1"), counties.column("svi_2"),
                           counties.column("svi_3"), counties.column("svi_4")};

  std::map<std::string, CountyRecord> records;
  for (const auto& row : counties.rows) {
    if (row[c_ev] != event_id) {
      continue;
    }
    CountyRecord rec;
    rec.fips = row[c_fips];
    if (records.count(rec.fips)) {
      throw std::runtime_error(counties_csv + ": duplicate county '" + rec.fips +
                               "' for event '" + event_id + "'");
    }
    rec.population = to_number(row[c_pop], "population");
    rec.area_sqkm = to_number(row[c_area], "area_sqkm");
    for (int i = 0; i < 4; ++i) {
      rec.svi[i] = to_number(row[c_svi[i]], "svi");
    }
    records.emplace(rec.fips, rec);
  }
  if (records.empty()) {
    throw std::runtime_error(counties_csv + ": no counties for event '" + event_id + "'");
  }

  // induced subgraph over this event's counties
  std::vector<std::string> fips_list;
  fips_list.reserve(records.size());
  for (const auto& [fips, rec] : records) {
    fips_list.push_back(fips);
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [a, b] : load_adjacency(adjacency_csv)) {
    if (records.count(a) && records.count(b)) {
      edges.emplace_back(a, b);
    }
  }
  Graph graph(fips_list, edges);

  // wind categories, defaulting to none
  CsvTable wind = read_csv(wind_csv);
  int w_ev = wind.column("event_id");
  int w_fips = wind.column("fips");
  int w_cat = wind.column("wind_category");
  std::map<std::string, WindCategory> wind_by_fips;
  for (const auto& row : wind.rows) {
    if (row[w_ev] != event_id || !records.count(row[w_fips])) {
      continue;
    }
    if (!wind_by_fips.emplace(row[w_fips], wind_from_string(row[w_cat])).second) {
      throw std::runtime_error(wind_csv + ": duplicate wind row for county '" +
                               row[w_fips] + "'");
    }
  }

  // outage time series per county
  CsvTable outages = read_csv(outages_csv);
  int o_ev = outages.column("event_id");
  int o_fips = outages.column("fips");
  int o_ts = outages.column("timestamp_utc");
  int o_out = outages.column("customers_out");
  int o_served = outages.column("customers_served");
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::map<std::string, double> served;
  for (const auto& row : outages.rows) {
    if (row[o_ev] != event_id) {
      continue;
    }
    const std::string& fips = row[o_fips];
    if (!records.count(fips)) {
      throw std::runtime_error(outages_csv + ": outage series for unknown county '" +
                               fips + "'");
    }
    series[fips].emplace_back(parse_iso8601_hours(row[o_ts]),
                              to_number(row[o_out], "customers_out"));
    double sv = to_number(row[o_served], "customers_served");
    auto [it, inserted] = served.emplace(fips, sv);
    if (!inserted && it->second != sv) {
      throw std::runtime_error(outages_csv + ": inconsistent customers_served for '" +
                               fips + "'");
    }
  }

  EventDataset ds{event_id, std::move(graph), Mat(static_cast<int>(records.size()),
                                                  kFeatureDim),
                  {}, {}, {}, {}, 0};
  const int n = ds.graph.size();
  ds.duration_hours.resize(n);
  ds.censored.resize(n);
  ds.labels.resize(n);
  for (int v = 0; v < n; ++v) {
    const std::string& fips = ds.graph.node_ids()[v];
    auto sit = series.find(fips);
    if (sit == series.end()) {
      throw std::runtime_error(outages_csv + ": no outage series for county '" + fips +
                               "'");
    }
    std::sort(sit->second.begin(), sit->second.end());
    DurationLabel lab = label_duration(sit->second, served.at(fips));
    ds.duration_hours[v] = lab.duration_hours;
    ds.censored[v] = lab.censored;
    ds.labels[v] = lab.clazz;

    double peak = 0.0;
    for (const auto& [t, out] : sit->second) {
      peak = std::max(peak, out);
    }
    WindCategory w = WindCategory::kNone;
    auto wit = wind_by_fips.find(fips);
    if (wit != wind_by_fips.end()) {
      w = wit->second;
    }
    auto f = raw_features(records.at(fips), w, peak);
    std::copy(f.begin(), f.end(), ds.features.row(v).begin());
  }
  return ds;
}

}  // namespace biggat
