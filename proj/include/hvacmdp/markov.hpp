#pragma once

// Per-stage Markov chains for the exogenous state components (outdoor temperature,
// outdoor humidity, occupancy), a counting estimator, and trajectory sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hvacmdp/error.hpp"
#include "hvacmdp/grid.hpp"
#include "hvacmdp/random.hpp"
#include "hvacmdp/weather.hpp"

namespace hvacmdp {

/// Dense row-major square matrix of transition probabilities.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(std::size_t n) : n_(n), p_(n * n, 0.0) {}

  static TransitionMatrix identity(std::size_t n) {
    TransitionMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return p_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {p_.data() + i * n_, n_}; }

  bool row_stochastic(double tol = 1e-9) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double sum = 0.0;
      for (double v : row(i)) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
  }

  bool operator==(const TransitionMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> p_;
};

/// Time-inhomogeneous chain: steps[t] maps the level at stage t to the level at t+1.
struct MarkovChain {
  std::vector<TransitionMatrix> steps;

  std::size_t levels() const { return steps.empty() ? 0 : steps.front().size(); }
  std::size_t stages() const { return steps.size() + 1; }

  std::size_t next(std::size_t t, std::size_t level, Rng& rng) const {
    const std::size_t j = draw_categorical(steps.at(t).row(level), rng);
    if (j >= levels()) throw NumericError("markov chain row has no mass");
    return j;
  }

  bool operator==(const MarkovChain&) const = default;
};

struct ExoLevels {
  std::size_t temp = 0;
  std::size_t humid = 0;
  std::size_t occ = 0;

  bool operator==(const ExoLevels&) const = default;
};

struct MarkovChainSet {
  LevelGrid temp_grid;
  LevelGrid humid_grid;
  LevelGrid occ_grid;
  MarkovChain temp;
  MarkovChain humid;
  MarkovChain occ;

  std::size_t stages() const { return temp.stages(); }

  void validate(double tol = 1e-9) const {
    const std::size_t t = temp.steps.size();
    if (humid.steps.size() != t || occ.steps.size() != t) throw GridMismatch("chains disagree on stage count");
    auto check = [&](const MarkovChain& c, const LevelGrid& g, const char* name) {
      for (const auto& m : c.steps) {
        if (m.size() != g.size()) throw GridMismatch(std::string(name) + " chain does not match its grid");
        if (!m.row_stochastic(tol)) throw DataError(std::string(name) + " chain is not row-stochastic");
      }
    };
    check(temp, temp_grid, "temperature");
    check(humid, humid_grid, "humidity");
    check(occ, occ_grid, "occupancy");
  }
};

/// Counting estimator p(i->j at t) = n_t(i,j) / n_t(i); rows never visited at t become identity rows.
inline MarkovChain estimate_chain(std::span<const std::vector<std::size_t>> sequences, std::size_t levels,
                                  std::size_t stages) {
  if (sequences.empty()) throw EmptyData("no sequences to estimate a chain from");
  if (levels == 0 || stages < 2) throw GridMismatch("chain needs at least one level and two stages");
  std::vector<std::vector<double>> counts(stages - 1, std::vector<double>(levels * levels, 0.0));
  for (const auto& seq : sequences) {
    if (seq.size() != stages)
      throw GridMismatch("sequence has " + std::to_string(seq.size()) + " stages, expected " + std::to_string(stages));
    for (std::size_t v : seq)
      if (v >= levels) throw GridMismatch("level " + std::to_string(v) + " outside a grid of " + std::to_string(levels));
    for (std::size_t t = 0; t + 1 < stages; ++t) counts[t][seq[t] * levels + seq[t + 1]] += 1.0;
  }

  MarkovChain chain;
  chain.steps.reserve(stages - 1);
  for (std::size_t t = 0; t + 1 < stages; ++t) {
    TransitionMatrix m(levels);
    for (std::size_t i = 0; i < levels; ++i) {
      double row_total = 0.0;
      for (std::size_t j = 0; j < levels; ++j) row_total += counts[t][i * levels + j];
      if (row_total == 0.0) {
        m(i, i) = 1.0;
        continue;
      }
      for (std::size_t j = 0; j < levels; ++j) m(i, j) = counts[t][i * levels + j] / row_total;
    }
    chain.steps.push_back(std::move(m));
  }
  return chain;
}

inline MarkovChain estimate_chain(const std::vector<std::vector<std::size_t>>& sequences, std::size_t levels,
                                  std::size_t stages) {
  return estimate_chain(std::span<const std::vector<std::size_t>>(sequences), levels, stages);
}

/// Fraction of the peak occupancy expected at `hour`: empty at night, ramp 7-9 h, full 9-18 h, decay to 21 h.
inline double occupancy_profile(double hour) {
  if (hour < 7.0 || hour >= 21.0) return 0.0;
  if (hour < 9.0) return (hour - 7.0) / 2.0;
  if (hour < 18.0) return 1.0;
  return (21.0 - hour) / 3.0;
}

/// Binomial(levels-1, q) weights; a cheap unimodal distribution over occupancy levels.
inline std::vector<double> binomial_weights(std::size_t levels, double q) {
  std::vector<double> w(levels, 0.0);
  const std::size_t n = levels - 1;
  if (n == 0 || q <= 0.0) {
    w[0] = 1.0;
    return w;
  }
  if (q >= 1.0) {
    w[n] = 1.0;
    return w;
  }
  double binom = 1.0;
  for (std::size_t k = 0; k <= n; ++k) {
    w[k] = binom * std::pow(q, static_cast<double>(k)) * std::pow(1.0 - q, static_cast<double>(n - k));
    binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
  }
  return w;
}

/// Working-hours occupancy chain P_t = rho*I + (1-rho)*1*q_{t+1}^T, with q from occupancy_profile.
inline MarkovChain default_occupancy_chain(std::size_t stages, double dt, std::size_t levels, double persistence = 0.6,
                                           double peak_share = 0.8) {
  if (levels == 0 || stages < 2) throw ConfigError("occupancy chain needs levels and at least two stages");
  if (!(persistence >= 0.0 && persistence <= 1.0)) throw ConfigError("occupancy persistence must lie in [0,1]");
  MarkovChain chain;
  for (std::size_t t = 0; t + 1 < stages; ++t) {
    const double hour = std::fmod(static_cast<double>(t + 1) * dt / 3600.0, 24.0);
    const auto q = binomial_weights(levels, peak_share * occupancy_profile(hour));
    TransitionMatrix m(levels);
    for (std::size_t i = 0; i < levels; ++i)
      for (std::size_t j = 0; j < levels; ++j) m(i, j) = (i == j ? persistence : 0.0) + (1.0 - persistence) * q[j];
    chain.steps.push_back(std::move(m));
  }
  return chain;
}

/// Level sequences of one quantity over a set of resampled days.
inline std::vector<std::vector<std::size_t>> discretize_days(std::span<const DayProfile> days, const LevelGrid& grid,
                                                             bool humidity) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(days.size());
  for (const auto& d : days) {
    const auto& values = humidity ? d.rh : d.temp_c;
    std::vector<std::size_t> seq;
    seq.reserve(values.size());
    for (double v : values) seq.push_back(grid.level(v));
    out.push_back(std::move(seq));
  }
  return out;
}

/// Chains for all three exogenous components. An empty `occupancy` span selects the default working-hours chain.
inline MarkovChainSet estimate_chains(std::span<const DayProfile> days,
                                      std::span<const std::vector<std::size_t>> occupancy, const LevelGrid& temp_grid,
                                      const LevelGrid& humid_grid, const LevelGrid& occ_grid, std::size_t stages,
                                      double dt) {
  if (days.empty()) throw EmptyData("no weather days to estimate chains from");
  MarkovChainSet set;
  set.temp_grid = temp_grid;
  set.humid_grid = humid_grid;
  set.occ_grid = occ_grid;
  set.temp = estimate_chain(discretize_days(days, temp_grid, false), temp_grid.size(), stages);
  set.humid = estimate_chain(discretize_days(days, humid_grid, true), humid_grid.size(), stages);
  set.occ = occupancy.empty() ? default_occupancy_chain(stages, dt, occ_grid.size())
                              : estimate_chain(occupancy, occ_grid.size(), stages);
  return set;
}

/// One day of exogenous levels, starting from `initial` at stage 0.
inline std::vector<ExoLevels> sample_exogenous(const MarkovChainSet& chains, Rng& rng, const ExoLevels& initial) {
  const std::size_t stages = chains.stages();
  std::vector<ExoLevels> day;
  day.reserve(stages);
  day.push_back(initial);
  for (std::size_t t = 0; t + 1 < stages; ++t) {
    const ExoLevels& cur = day.back();
    ExoLevels nxt;
    nxt.temp = chains.temp.next(t, cur.temp, rng);
    nxt.humid = chains.humid.next(t, cur.humid, rng);
    nxt.occ = chains.occ.next(t, cur.occ, rng);
    day.push_back(nxt);
  }
  return day;
}

inline std::vector<ExoLevels> sample_exogenous(const MarkovChainSet& chains, std::uint64_t seed,
                                               const ExoLevels& initial) {
  Rng rng(seed);
  return sample_exogenous(chains, rng, initial);
}

}  // namespace hvacmdp
