#pragma once

// Index codecs for the discretized state (outdoor temp, outdoor RH, indoor temp,
// indoor RH, occupancy) and the HVAC action grid.

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hvacmdp/error.hpp"
#include "hvacmdp/grid.hpp"
#include "hvacmdp/thermal.hpp"
#include "hvacmdp/weather.hpp"

namespace hvacmdp {

struct StateTuple {
  std::size_t t_out = 0;
  std::size_t rh_out = 0;
  std::size_t t_in = 0;
  std::size_t rh_in = 0;
  std::size_t occ = 0;

  bool operator==(const StateTuple&) const = default;
};

struct StateGrids {
  LevelGrid t_out;
  LevelGrid rh_out;
  LevelGrid t_in;
  LevelGrid rh_in;
  LevelGrid occ;

  bool operator==(const StateGrids&) const = default;
};

/// Inclusive range of level indices.
struct LevelWindow {
  std::size_t lo = 0;
  std::size_t hi = 0;

  std::size_t clamp(std::size_t v) const { return std::clamp(v, lo, hi); }
  std::size_t size() const { return hi - lo + 1; }
  bool operator==(const LevelWindow&) const = default;
};

/// Flat mixed-radix index over the full grid product. Per-stage windows on the outdoor
/// components restrict the active subset; out-of-window tuples map to the nearest active level.
class StateSpace {
 public:
  StateSpace() = default;

  StateSpace(StateGrids grids, std::size_t stages) : grids_(std::move(grids)) {
    if (stages == 0) throw ConfigError("state space needs at least one stage");
    radix_ = {grids_.t_out.size(), grids_.rh_out.size(), grids_.t_in.size(), grids_.rh_in.size(), grids_.occ.size()};
    size_ = 1;
    for (std::size_t r : radix_) size_ *= r;
    temp_window_.assign(stages, {0, radix_[0] - 1});
    humid_window_.assign(stages, {0, radix_[1] - 1});
  }

  const StateGrids& grids() const { return grids_; }
  std::size_t size() const { return size_; }
  std::size_t stages() const { return temp_window_.size(); }

  std::size_t encode(const StateTuple& s) const {
    const std::array<std::size_t, 5> v{s.t_out, s.rh_out, s.t_in, s.rh_in, s.occ};
    std::size_t idx = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      if (v[k] >= radix_[k]) throw OutOfRange("state component " + std::to_string(k) + " level " + std::to_string(v[k]));
      idx = idx * radix_[k] + v[k];
    }
    return idx;
  }

  StateTuple decode(std::size_t idx) const {
    if (idx >= size_) throw OutOfRange("state index " + std::to_string(idx));
    std::array<std::size_t, 5> v{};
    for (std::size_t k = 5; k-- > 0;) {
      v[k] = idx % radix_[k];
      idx /= radix_[k];
    }
    return {v[0], v[1], v[2], v[3], v[4]};
  }

  /// Level tuple of physical values (nearest level on every grid).
  StateTuple quantize(double t_out, double rh_out, double t_in, double rh_in, double occ) const {
    return {grids_.t_out.level(t_out), grids_.rh_out.level(rh_out), grids_.t_in.level(t_in), grids_.rh_in.level(rh_in),
            grids_.occ.level(occ)};
  }

  void set_window(std::size_t t, LevelWindow temp, LevelWindow humid) {
    if (t >= stages()) throw OutOfRange("stage " + std::to_string(t));
    if (temp.lo > temp.hi || temp.hi >= radix_[0] || humid.lo > humid.hi || humid.hi >= radix_[1])
      throw ConfigError("state window outside the grid");
    temp_window_[t] = temp;
    humid_window_[t] = humid;
  }

  LevelWindow temp_window(std::size_t t) const { return temp_window_.at(t); }
  LevelWindow humid_window(std::size_t t) const { return humid_window_.at(t); }

  StateTuple clamp_to_active(std::size_t t, StateTuple s) const {
    s.t_out = temp_window_.at(t).clamp(s.t_out);
    s.rh_out = humid_window_.at(t).clamp(s.rh_out);
    return s;
  }

  bool active(std::size_t t, const StateTuple& s) const { return clamp_to_active(t, s) == s; }

  std::size_t active_size(std::size_t t) const {
    return temp_window_.at(t).size() * humid_window_.at(t).size() * radix_[2] * radix_[3] * radix_[4];
  }

  /// Windows spanning the levels observed at each stage, widened by `margin` levels.
  void fit_windows(std::span<const DayProfile> days, std::size_t margin = 1) {
    if (days.empty()) throw EmptyData("no days to fit state windows on");
    for (std::size_t t = 0; t < stages(); ++t) {
      std::size_t tlo = radix_[0], thi = 0, hlo = radix_[1], hhi = 0;
      for (const auto& d : days) {
        if (d.temp_c.size() != stages() || d.rh.size() != stages())
          throw GridMismatch("day profile length does not match the stage count");
        const std::size_t tl = grids_.t_out.level(d.temp_c[t]);
        const std::size_t hl = grids_.rh_out.level(d.rh[t]);
        tlo = std::min(tlo, tl);
        thi = std::max(thi, tl);
        hlo = std::min(hlo, hl);
        hhi = std::max(hhi, hl);
      }
      const auto widen = [margin](std::size_t lo, std::size_t hi, std::size_t n) {
        return LevelWindow{lo > margin ? lo - margin : 0, std::min(hi + margin, n - 1)};
      };
      set_window(t, widen(tlo, thi, radix_[0]), widen(hlo, hhi, radix_[1]));
    }
  }

 private:
  StateGrids grids_;
  std::array<std::size_t, 5> radix_{1, 1, 1, 1, 1};
  std::size_t size_ = 1;
  std::vector<LevelWindow> temp_window_;
  std::vector<LevelWindow> humid_window_;
};

struct ActionLevels {
  std::vector<double> g_fau;
  std::vector<double> t_fau;
  std::vector<double> g_fcu;
  std::vector<double> t_fcu;

  bool operator==(const ActionLevels&) const = default;
};

/// Cartesian product of control levels; index = ((g_fau*|T_fau| + t_fau)*|G_fcu| + g_fcu)*|T_fcu| + t_fcu.
class ActionSpace {
 public:
  ActionSpace() = default;

  ActionSpace(ActionLevels levels, const HvacParams& hvac) : levels_(std::move(levels)) {
    auto check = [](const std::vector<double>& v, const Bounds& b, const char* name) {
      if (v.empty()) throw ConfigError(std::string(name) + " needs at least one level");
      for (double x : v)
        if (!b.contains(x, 1e-9)) throw ConfigError(std::string(name) + " level outside the HVAC bounds");
    };
    check(levels_.g_fau, hvac.fau_flow, "FAU flow");
    check(levels_.t_fau, hvac.fau_temp, "FAU temperature");
    check(levels_.g_fcu, hvac.fcu_flow, "FCU flow");
    check(levels_.t_fcu, hvac.fcu_temp, "FCU temperature");
  }

  const ActionLevels& levels() const { return levels_; }
  std::size_t size() const {
    return levels_.g_fau.size() * levels_.t_fau.size() * levels_.g_fcu.size() * levels_.t_fcu.size();
  }

  ControlInput decode(std::size_t idx) const {
    if (idx >= size()) throw OutOfRange("action index " + std::to_string(idx));
    ControlInput u;
    u.t_fcu = levels_.t_fcu[idx % levels_.t_fcu.size()];
    idx /= levels_.t_fcu.size();
    u.g_fcu = levels_.g_fcu[idx % levels_.g_fcu.size()];
    idx /= levels_.g_fcu.size();
    u.t_fau = levels_.t_fau[idx % levels_.t_fau.size()];
    idx /= levels_.t_fau.size();
    u.g_fau = levels_.g_fau[idx];
    return u;
  }

  /// Index of a control that sits exactly on the level grid.
  std::size_t encode(const ControlInput& u) const {
    auto find = [](const std::vector<double>& v, double x, const char* name) {
      const auto it = std::find(v.begin(), v.end(), x);
      if (it == v.end()) throw OutOfRange(std::string(name) + " value not on the action grid");
      return static_cast<std::size_t>(it - v.begin());
    };
    const std::size_t a = find(levels_.g_fau, u.g_fau, "FAU flow");
    const std::size_t b = find(levels_.t_fau, u.t_fau, "FAU temperature");
    const std::size_t c = find(levels_.g_fcu, u.g_fcu, "FCU flow");
    const std::size_t d = find(levels_.t_fcu, u.t_fcu, "FCU temperature");
    return ((a * levels_.t_fau.size() + b) * levels_.g_fcu.size() + c) * levels_.t_fcu.size() + d;
  }

 private:
  ActionLevels levels_;
};

}  // namespace hvacmdp
