#pragma once

// Outdoor weather records: CSV ingestion, per-stage resampling, and a seeded
// synthetic generator with a tropical diurnal shape.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hvacmdp/error.hpp"
#include "hvacmdp/random.hpp"

namespace hvacmdp {

struct WeatherRecord {
  int minute_of_day = 0;   // 0..1439
  double temp_c = 0.0;
  double rh = 0.0;         // fraction
  std::optional<double> solar_wm2;
};

struct WeatherDay {
  std::string date;  // YYYY-MM-DD
  std::vector<WeatherRecord> records;
};

using WeatherSeries = std::vector<WeatherDay>;

/// One day aggregated to decision stages.
struct DayProfile {
  std::string date;
  std::vector<double> temp_c;
  std::vector<double> rh;
  std::vector<double> solar_wm2;  // empty when the source had no solar column
};

namespace detail {

// Civil-calendar conversions (proleptic Gregorian), days relative to 1970-01-01.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline std::string civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(y + (m <= 2)), m, d);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view s, const char* what, std::size_t line) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw DataError("weather csv line " + std::to_string(line) + ": bad " + what + " '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError("weather csv line " + std::to_string(line) + ": bad timestamp field");
  return v;
}

/// Splits "YYYY-MM-DDThh:mm[:ss][Z]" (or with a space separator) into date and minute of day.
inline std::pair<std::string, int> parse_timestamp(std::string_view ts, std::size_t line) {
  ts = trim(ts);
  if (ts.size() < 16 || (ts[10] != 'T' && ts[10] != ' ') || ts[4] != '-' || ts[7] != '-' || ts[13] != ':')
    throw DataError("weather csv line " + std::to_string(line) + ": timestamp is not ISO-8601");
  const int year = parse_int(ts.substr(0, 4), line);
  const int month = parse_int(ts.substr(5, 2), line);
  const int day = parse_int(ts.substr(8, 2), line);
  const int hour = parse_int(ts.substr(11, 2), line);
  const int minute = parse_int(ts.substr(14, 2), line);
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || year < 0)
    throw DataError("weather csv line " + std::to_string(line) + ": timestamp out of range");
  return {std::string(ts.substr(0, 10)), hour * 60 + minute};
}

}  // namespace detail

/// Reads `timestamp,temp_c,rh_pct[,solar_wm2]`; RH is converted from percent to a fraction.
inline WeatherSeries read_weather_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw EmptyData("weather csv has no header");
  ++line_no;
  const std::string header(detail::trim(line));
  bool with_solar = false;
  if (header == "timestamp,temp_c,rh_pct,solar_wm2")
    with_solar = true;
  else if (header != "timestamp,temp_c,rh_pct")
    throw DataError("weather csv header must be 'timestamp,temp_c,rh_pct[,solar_wm2]'");

  WeatherSeries series;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != (with_solar ? 4u : 3u))
      throw DataError("weather csv line " + std::to_string(line_no) + ": wrong field count");

    auto [date, minute] = detail::parse_timestamp(fields[0], line_no);
    WeatherRecord rec;
    rec.minute_of_day = minute;
    rec.temp_c = detail::parse_double(fields[1], "temperature", line_no);
    rec.rh = detail::parse_double(fields[2], "humidity", line_no) / 100.0;
    if (with_solar) rec.solar_wm2 = detail::parse_double(fields[3], "solar", line_no);

    if (series.empty() || series.back().date != date) {
      if (!series.empty() && date < series.back().date)
        throw DataError("weather csv line " + std::to_string(line_no) + ": days out of order");
      series.push_back({date, {}});
    } else if (minute <= series.back().records.back().minute_of_day) {
      throw DataError("weather csv line " + std::to_string(line_no) + ": timestamps not increasing");
    }
    series.back().records.push_back(rec);
  }
  if (series.empty()) throw EmptyData("weather csv has no records");
  return series;
}

inline void write_weather_csv(std::ostream& out, const WeatherSeries& series) {
  const bool with_solar = !series.empty() && !series.front().records.empty() &&
                          series.front().records.front().solar_wm2.has_value();
  out << (with_solar ? "timestamp,temp_c,rh_pct,solar_wm2\n" : "timestamp,temp_c,rh_pct\n");
  char buf[160];
  for (const auto& day : series) {
    for (const auto& r : day.records) {
      int n = std::snprintf(buf, sizeof buf, "%sT%02d:%02d:00,%.4f,%.4f", day.date.c_str(), r.minute_of_day / 60,
                            r.minute_of_day % 60, r.temp_c, r.rh * 100.0);
      out.write(buf, n);
      if (with_solar) {
        n = std::snprintf(buf, sizeof buf, ",%.3f", r.solar_wm2.value_or(0.0));
        out.write(buf, n);
      }
      out << '\n';
    }
  }
}

/// Mean of each `dt`-second window. Days with an empty window are dropped.
inline std::vector<DayProfile> resample_days(const WeatherSeries& series, std::size_t stages, double dt) {
  const double window_minutes = dt / 60.0;
  if (!(window_minutes > 0.0) || stages == 0) throw ConfigError("resample_days: bad stage layout");
  std::vector<DayProfile> out;
  for (const auto& day : series) {
    std::vector<double> t_sum(stages, 0.0), h_sum(stages, 0.0), s_sum(stages, 0.0);
    std::vector<int> count(stages, 0);
    bool any_solar = false;
    for (const auto& r : day.records) {
      const auto k = static_cast<std::size_t>(std::floor(r.minute_of_day / window_minutes));
      if (k >= stages) continue;
      t_sum[k] += r.temp_c;
      h_sum[k] += r.rh;
      if (r.solar_wm2) {
        s_sum[k] += *r.solar_wm2;
        any_solar = true;
      }
      ++count[k];
    }
    if (std::any_of(count.begin(), count.end(), [](int c) { return c == 0; })) continue;
    DayProfile p;
    p.date = day.date;
    for (std::size_t k = 0; k < stages; ++k) {
      p.temp_c.push_back(t_sum[k] / count[k]);
      p.rh.push_back(h_sum[k] / count[k]);
      if (any_solar) p.solar_wm2.push_back(s_sum[k] / count[k]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

struct SyntheticWeatherProfile {
  double temp_center = 28.0;    // degC
  double temp_amplitude = 5.0;  // degC
  double rh_center = 0.72;
  double rh_amplitude = 0.20;
  double peak_hour = 14.0;      // hour of maximum temperature (and minimum RH)
  double day_offset_sd = 1.0;   // degC, whole-day shift
  double noise_sd = 0.6;        // degC, stationary sd of the minute-level AR(1) noise
  double noise_corr = 0.995;    // minute-to-minute AR(1) coefficient
  double rh_per_degree = -0.04; // RH response to temperature anomalies
  double rh_noise_sd = 0.03;
  double solar_peak = 100.0;    // W/m2 at solar noon
  double sunrise_hour = 7.0;
  double sunset_hour = 19.0;
  double temp_min = 22.0, temp_max = 34.0;
  double rh_min = 0.40, rh_max = 1.00;
  std::string start_date = "2019-09-01";
};

inline double synthetic_solar(const SyntheticWeatherProfile& p, double hour) {
  if (hour <= p.sunrise_hour || hour >= p.sunset_hour) return 0.0;
  return p.solar_peak * std::sin(std::numbers::pi * (hour - p.sunrise_hour) / (p.sunset_hour - p.sunrise_hour));
}

/// Minute-resolution synthetic weather: diurnal sinusoid plus seeded day-level and AR(1) noise.
inline WeatherSeries synth_weather(const SyntheticWeatherProfile& p, std::size_t n_days, std::uint64_t seed) {
  const int y = std::stoi(p.start_date.substr(0, 4));
  const auto m = static_cast<unsigned>(std::stoi(p.start_date.substr(5, 2)));
  const auto d = static_cast<unsigned>(std::stoi(p.start_date.substr(8, 2)));
  const std::int64_t day0 = detail::days_from_civil(y, m, d);

  Rng rng(derive_seed(seed, 0x5eed));
  const double innovation = p.noise_sd * std::sqrt(1.0 - p.noise_corr * p.noise_corr);
  double ar = p.noise_sd * standard_normal(rng);

  WeatherSeries series;
  series.reserve(n_days);
  for (std::size_t day = 0; day < n_days; ++day) {
    WeatherDay wd;
    wd.date = detail::civil_from_days(day0 + static_cast<std::int64_t>(day));
    wd.records.reserve(1440);
    const double offset = p.day_offset_sd * standard_normal(rng);
    for (int minute = 0; minute < 1440; ++minute) {
      const double hour = minute / 60.0;
      const double phase = std::cos(2.0 * std::numbers::pi * (hour - p.peak_hour) / 24.0);
      ar = p.noise_corr * ar + innovation * standard_normal(rng);
      const double anomaly = offset + ar;
      const double rh_noise = p.rh_noise_sd * standard_normal(rng);
      WeatherRecord r;
      r.minute_of_day = minute;
      r.temp_c = std::clamp(p.temp_center + p.temp_amplitude * phase + anomaly, p.temp_min, p.temp_max);
      r.rh = std::clamp(p.rh_center - p.rh_amplitude * phase + p.rh_per_degree * anomaly + rh_noise, p.rh_min,
                        p.rh_max);
      r.solar_wm2 = synthetic_solar(p, hour);
      wd.records.push_back(r);
    }
    series.push_back(std::move(wd));
  }
  return series;
}

}  // namespace hvacmdp
