#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "hvacmdp/error.hpp"

namespace hvacmdp {

/// Time-of-use tariff: hour ranges [from, to) with a price per kWh; must tile [0, 24).
class PriceSchedule {
 public:
  struct Segment {
    double from_hour = 0.0;
    double to_hour = 24.0;
    double price = 0.0;
    bool operator==(const Segment&) const = default;
  };

  PriceSchedule() : segments_{{0.0, 24.0, 0.0}} {}
  explicit PriceSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) { validate(); }

  static PriceSchedule flat(double price) { return PriceSchedule({{0.0, 24.0, price}}); }

  /// Parses "0-9:0.16,9-21:0.24,21-24:0.16".
  static PriceSchedule parse(std::string_view text) {
    std::vector<Segment> segs;
    auto number = [&](std::string_view s) {
      double v = 0.0;
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("bad number '" + std::string(s) + "' in price schedule");
      return v;
    };
    while (!text.empty()) {
      const auto comma = text.find(',');
      const std::string_view item = text.substr(0, comma);
      const auto dash = item.find('-');
      const auto colon = item.find(':');
      if (dash == std::string_view::npos || colon == std::string_view::npos || dash > colon)
        throw ConfigError("price segment must look like 'from-to:price'");
      segs.push_back({number(item.substr(0, dash)), number(item.substr(dash + 1, colon - dash - 1)),
                      number(item.substr(colon + 1))});
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
    return PriceSchedule(std::move(segs));
  }

  std::string to_string() const {
    std::string out;
    char buf[96];
    for (const auto& s : segments_) {
      std::snprintf(buf, sizeof buf, "%s%g-%g:%g", out.empty() ? "" : ",", s.from_hour, s.to_hour, s.price);
      out += buf;
    }
    return out;
  }

  double at_hour(double hour) const {
    hour = std::fmod(hour, 24.0);
    if (hour < 0.0) hour += 24.0;
    for (const auto& s : segments_)
      if (hour >= s.from_hour && hour < s.to_hour) return s.price;
    return segments_.back().price;
  }

  double max_price() const {
    double m = 0.0;
    for (const auto& s : segments_) m = std::max(m, s.price);
    return m;
  }

  const std::vector<Segment>& segments() const { return segments_; }
  bool operator==(const PriceSchedule&) const = default;

 private:
  void validate() const {
    if (segments_.empty()) throw ConfigError("price schedule is empty");
    double expect = 0.0;
    for (const auto& s : segments_) {
      if (std::abs(s.from_hour - expect) > 1e-9 || !(s.to_hour > s.from_hour))
        throw ConfigError("price segments must be contiguous and increasing from hour 0");
      if (!(s.price >= 0.0)) throw ConfigError("prices must be non-negative");
      expect = s.to_hour;
    }
    if (std::abs(expect - 24.0) > 1e-9) throw ConfigError("price schedule must end at hour 24");
  }

  std::vector<Segment> segments_;
};

}  // namespace hvacmdp
