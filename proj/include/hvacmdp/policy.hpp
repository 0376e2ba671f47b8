#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hvacmdp/error.hpp"
#include "hvacmdp/random.hpp"

namespace hvacmdp {

using PolicyRow = std::vector<double>;

inline PolicyRow uniform_row(std::size_t n_actions) {
  return PolicyRow(n_actions, n_actions ? 1.0 / static_cast<double>(n_actions) : 0.0);
}

inline double row_mass(std::span<const double> row) { return std::accumulate(row.begin(), row.end(), 0.0); }

/// Categorical draw proportional to the row weights.
inline std::size_t sample_from_row(std::span<const double> row, Rng& rng) {
  const std::size_t a = draw_categorical(row, rng);
  if (a >= row.size()) throw DeadState("policy row has no positive weight");
  return a;
}

/// Per-stage table sigma_t(s, a). Rows are stored sparsely; a state without an explicit row
/// uses the row produced by the initializer, which must be a pure function of (stage, state).
class StochasticPolicy {
 public:
  using RowInit = std::function<PolicyRow(std::size_t stage, std::size_t state)>;

  StochasticPolicy() = default;

  StochasticPolicy(std::size_t stages, std::size_t n_actions, RowInit init = {})
      : n_actions_(n_actions), rows_(stages), init_(std::move(init)) {
    if (n_actions_ == 0) throw ConfigError("policy needs at least one action");
  }

  std::size_t stages() const { return rows_.size(); }
  std::size_t num_actions() const { return n_actions_; }

  void set_initializer(RowInit init) { init_ = std::move(init); }
  const RowInit& initializer() const { return init_; }

  const PolicyRow* find(std::size_t t, std::size_t s) const {
    const auto& m = rows_.at(t);
    const auto it = m.find(s);
    return it == m.end() ? nullptr : &it->second;
  }

  bool has_row(std::size_t t, std::size_t s) const { return find(t, s) != nullptr; }

  /// Explicit row if present, else the initializer's row (uniform with unit mass by default).
  PolicyRow row(std::size_t t, std::size_t s) const {
    if (const PolicyRow* r = find(t, s)) return *r;
    return default_row(t, s);
  }

  PolicyRow default_row(std::size_t t, std::size_t s) const {
    PolicyRow r = init_ ? init_(t, s) : uniform_row(n_actions_);
    if (r.size() != n_actions_) throw ConfigError("policy initializer returned a row of the wrong width");
    return r;
  }

  PolicyRow& materialize(std::size_t t, std::size_t s) {
    auto& m = rows_.at(t);
    auto it = m.find(s);
    if (it == m.end()) it = m.emplace(s, default_row(t, s)).first;
    return it->second;
  }

  void set_row(std::size_t t, std::size_t s, PolicyRow r) {
    if (r.size() != n_actions_) throw ConfigError("policy row has the wrong width");
    for (double v : r)
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("policy weights must lie in [0,1]");
    rows_.at(t)[s] = std::move(r);
  }

  double mass(std::size_t t, std::size_t s) const {
    if (const PolicyRow* r = find(t, s)) return row_mass(*r);
    return row_mass(default_row(t, s));
  }

  double weight(std::size_t t, std::size_t s, std::size_t a) const {
    if (a >= n_actions_) throw OutOfRange("action index " + std::to_string(a));
    if (const PolicyRow* r = find(t, s)) return (*r)[a];
    return default_row(t, s)[a];
  }

  std::size_t sample_action(std::size_t t, std::size_t s, Rng& rng) const {
    if (const PolicyRow* r = find(t, s)) return sample_from_row(*r, rng);
    return sample_from_row(default_row(t, s), rng);
  }

  /// Sets sigma_t(s, a) to exactly zero. Later draws renormalize over the surviving entries.
  void mask(std::size_t t, std::size_t s, std::size_t a) {
    if (a >= n_actions_) throw OutOfRange("action index " + std::to_string(a));
    if (!has_row(t, s) && default_row(t, s)[a] == 0.0) return;
    materialize(t, s)[a] = 0.0;
  }

  const std::map<std::size_t, PolicyRow>& rows(std::size_t t) const { return rows_.at(t); }

  std::size_t explicit_rows() const {
    std::size_t n = 0;
    for (const auto& m : rows_) n += m.size();
    return n;
  }

  /// Equality of the explicit tables (initializers are not comparable).
  bool same_table(const StochasticPolicy& o) const { return n_actions_ == o.n_actions_ && rows_ == o.rows_; }

 private:
  std::size_t n_actions_ = 0;
  std::vector<std::map<std::size_t, PolicyRow>> rows_;
  RowInit init_;
};

}  // namespace hvacmdp
