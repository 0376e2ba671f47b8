#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "hvacmdp/error.hpp"

namespace hvacmdp {

/// Equally spaced levels lo, lo+step, ..., lo+(count-1)*step.
class LevelGrid {
 public:
  LevelGrid() = default;

  LevelGrid(double lo, double step, std::size_t count) : lo_(lo), step_(step), count_(count) {
    if (count_ == 0) throw ConfigError("level grid needs at least one level");
    if (count_ > 1 && !(step_ > 0.0)) throw ConfigError("level grid step must be positive");
  }

  /// Grid covering [lo, hi] at the given resolution (hi is included up to rounding).
  static LevelGrid covering(double lo, double hi, double step) {
    if (!(hi >= lo)) throw ConfigError("level grid requires lo <= hi");
    if (!(step > 0.0)) throw ConfigError("level grid step must be positive");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    return LevelGrid(lo, step, n);
  }

  /// `count` levels spread evenly over [lo, hi].
  static LevelGrid spread(double lo, double hi, std::size_t count) {
    if (count == 0) throw ConfigError("level grid needs at least one level");
    if (count == 1) return LevelGrid(lo, 1.0, 1);
    return LevelGrid(lo, (hi - lo) / static_cast<double>(count - 1), count);
  }

  double lo() const { return lo_; }
  double hi() const { return value(count_ - 1); }
  double step() const { return step_; }
  std::size_t size() const { return count_; }

  double value(std::size_t level) const {
    if (level >= count_) throw std::out_of_range("level grid index");
    return lo_ + static_cast<double>(level) * step_;
  }

  /// Nearest level, clamped to the grid ends.
  std::size_t level(double x) const {
    if (count_ == 1) return 0;
    const double pos = std::round((x - lo_) / step_);
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), count_ - 1);
  }

  bool operator==(const LevelGrid& o) const {
    return count_ == o.count_ && std::abs(lo_ - o.lo_) < 1e-12 && std::abs(step_ - o.step_) < 1e-12;
  }

 private:
  double lo_ = 0.0;
  double step_ = 1.0;
  std::size_t count_ = 1;
};

}  // namespace hvacmdp
