#pragma once

// Reference solvers: backward induction on an enumerated MDP, and a perfect-information
// optimizer for one fully revealed exogenous day of the HVAC model.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "hvacmdp/enumerated.hpp"
#include "hvacmdp/error.hpp"
#include "hvacmdp/hvac_mdp.hpp"
#include "hvacmdp/policy.hpp"

namespace hvacmdp {

struct DpSolution {
  std::vector<std::vector<std::size_t>> action;  // [t][s]
  std::vector<std::vector<double>> value;        // [t][s], value[T] = 0
  double j = 0.0;                                // expected optimal cost from the initial distribution

  /// Deterministic policy table (one-hot rows).
  StochasticPolicy to_policy(std::size_t n_actions) const {
    StochasticPolicy p(action.size(), n_actions);
    for (std::size_t t = 0; t < action.size(); ++t)
      for (std::size_t s = 0; s < action[t].size(); ++s) {
        PolicyRow row(n_actions, 0.0);
        row[action[t][s]] = 1.0;
        p.set_row(t, s, std::move(row));
      }
    return p;
  }
};

/// V_t(s) = min_a [ r_t(s,a) + sum_s' p(s'|s,a) V_{t+1}(s') ]; ties go to the lowest action index.
inline DpSolution solve_dp(const EnumeratedMdp& mdp) {
  mdp.check_size();
  const std::size_t T = mdp.n_stages, S = mdp.n_states, A = mdp.n_actions;
  DpSolution sol;
  sol.value.assign(T + 1, std::vector<double>(S, 0.0));
  sol.action.assign(T, std::vector<std::size_t>(S, 0));
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_a = 0;
      for (std::size_t a = 0; a < A; ++a) {
        double q = mdp.r(t, s, a);
        for (const auto& tr : mdp.next(t, s, a)) q += tr.prob * sol.value[t + 1][tr.next];
        if (q < best) {
          best = q;
          best_a = a;
        }
      }
      sol.value[t][s] = best;
      sol.action[t][s] = best_a;
    }
  }
  for (std::size_t s = 0; s < S; ++s) sol.j += mdp.initial[s] * sol.value[0][s];
  return sol;
}

struct PerfectInfoOptions {
  // Bucket sizes of the forward search; states falling in one bucket keep only the cheapest.
  // A resolution of 0 merges only bit-identical states, which makes the search exhaustive.
  double temp_resolution = 0.1;  // degC
  double rh_resolution = 0.01;   // fraction
};

struct PerfectInfoSolution {
  std::vector<std::size_t> actions;
  std::vector<ContinuousState> states;  // T+1 states, starting with the initial one
  double cost = 0.0;
};

namespace detail {

struct BucketKey {
  std::array<std::int64_t, 4> v{};
  bool operator==(const BucketKey&) const = default;
};

struct BucketHash {
  std::size_t operator()(const BucketKey& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::int64_t x : k.v) h = splitmix64(h ^ static_cast<std::uint64_t>(x));
    return static_cast<std::size_t>(h);
  }
};

inline BucketKey bucket_of(const ContinuousState& x, const PerfectInfoOptions& opt) {
  if (opt.temp_resolution <= 0.0 || opt.rh_resolution <= 0.0)
    return {{std::bit_cast<std::int64_t>(x.t_indoor), std::bit_cast<std::int64_t>(x.rh_indoor),
             std::bit_cast<std::int64_t>(x.t_wall_left), std::bit_cast<std::int64_t>(x.t_wall_right)}};
  return {{static_cast<std::int64_t>(std::llround(x.t_indoor / opt.temp_resolution)),
           static_cast<std::int64_t>(std::llround(x.rh_indoor / opt.rh_resolution)), 0, 0}};
}

}  // namespace detail

/// Cheapest comfortable action sequence for one fully revealed day, by a forward search over
/// indoor conditions that merges states sharing a bucket.
inline PerfectInfoSolution solve_perfect_information(const HvacMdp& env, const Scenario& scenario,
                                                     const PerfectInfoOptions& opt = {}) {
  const std::size_t T = env.stages();
  if (scenario.size() != T) throw GridMismatch("scenario length differs from the horizon");
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  struct Node {
    ContinuousState x;
    double cost = 0.0;
    std::size_t parent = kNone;
    std::size_t action = kNone;
  };
  std::vector<std::vector<Node>> layers(T + 1);
  layers[0].push_back({env.initial_state(), 0.0, kNone, kNone});
  for (std::size_t t = 0; t < T; ++t) {
    std::unordered_map<detail::BucketKey, std::size_t, detail::BucketHash> index;
    auto& next = layers[t + 1];
    for (std::size_t i = 0; i < layers[t].size(); ++i) {
      const Node& node = layers[t][i];
      for (std::size_t a = 0; a < env.num_actions(); ++a) {
        const StepOutcome out = env.simulate(t, scenario[t], node.x, a);
        if (!out.comfortable) continue;
        const double c = node.cost + out.cost;
        const auto key = detail::bucket_of(out.next, opt);
        const auto it = index.find(key);
        if (it == index.end()) {
          index.emplace(key, next.size());
          next.push_back({out.next, c, i, a});
        } else if (c < next[it->second].cost) {
          next[it->second] = {out.next, c, i, a};
        }
      }
    }
    if (next.empty()) throw InfeasibleError("no comfortable control sequence reaches stage " + std::to_string(t + 1));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < layers[T].size(); ++i)
    if (layers[T][i].cost < layers[T][best].cost) best = i;
  PerfectInfoSolution sol;
  sol.cost = layers[T][best].cost;
  sol.actions.resize(T);
  sol.states.resize(T + 1);
  for (std::size_t t = T, i = best; t > 0; --t) {
    const Node& n = layers[t][i];
    sol.actions[t - 1] = n.action;
    sol.states[t] = n.x;
    i = n.parent;
  }
  sol.states[0] = env.initial_state();
  return sol;
}

}  // namespace hvacmdp
