#pragma once

// Explicitly tabulated finite-horizon MDP: exact policy evaluation by forward/backward
// recursion, and a sampler so the Monte-Carlo learner can run on the same model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

#include "hvacmdp/error.hpp"
#include "hvacmdp/path.hpp"
#include "hvacmdp/policy.hpp"
#include "hvacmdp/random.hpp"

namespace hvacmdp {

inline constexpr std::size_t kEnumerationLimit = 1'000'000;

struct Transition {
  std::size_t next = 0;
  double prob = 0.0;
};

struct EnumeratedMdp {
  std::size_t n_stages = 0;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> initial;                 // distribution of the stage-0 state
  std::vector<std::vector<Transition>> trans;  // [(t*S + s)*A + a]
  std::vector<double> cost;                    // [(t*S + s)*A + a]

  EnumeratedMdp() = default;
  EnumeratedMdp(std::size_t stages, std::size_t states, std::size_t actions)
      : n_stages(stages), n_states(states), n_actions(actions), initial(states, 0.0),
        trans(stages * states * actions), cost(stages * states * actions, 0.0) {}

  std::size_t at(std::size_t t, std::size_t s, std::size_t a) const { return (t * n_states + s) * n_actions + a; }
  double& r(std::size_t t, std::size_t s, std::size_t a) { return cost[at(t, s, a)]; }
  double r(std::size_t t, std::size_t s, std::size_t a) const { return cost[at(t, s, a)]; }
  std::vector<Transition>& next(std::size_t t, std::size_t s, std::size_t a) { return trans[at(t, s, a)]; }
  const std::vector<Transition>& next(std::size_t t, std::size_t s, std::size_t a) const { return trans[at(t, s, a)]; }

  std::size_t stages() const { return n_stages; }
  std::size_t num_actions() const { return n_actions; }

  void check_size(std::size_t limit = kEnumerationLimit) const {
    if (n_states * n_actions * n_stages > limit)
      throw TooLarge(std::to_string(n_states) + " states x " + std::to_string(n_actions) + " actions x " +
                     std::to_string(n_stages) + " stages");
  }

  void validate(double tol = 1e-9) const {
    if (initial.size() != n_states) throw ConfigError("initial distribution has the wrong size");
    double init_total = 0.0;
    for (double p : initial) init_total += p;
    if (std::abs(init_total - 1.0) > tol) throw ConfigError("initial distribution does not sum to 1");
    for (std::size_t k = 0; k < trans.size(); ++k) {
      double total = 0.0;
      for (const auto& tr : trans[k]) {
        if (tr.next >= n_states || !(tr.prob >= 0.0)) throw ConfigError("bad transition entry");
        total += tr.prob;
      }
      if (std::abs(total - 1.0) > tol) throw ConfigError("transition row " + std::to_string(k) + " does not sum to 1");
      if (!std::isfinite(cost[k])) throw ConfigError("non-finite stage cost");
    }
  }

  std::size_t sample_next(std::size_t t, std::size_t s, std::size_t a, Rng& rng) const {
    const auto& row = next(t, s, a);
    const double u = uniform01(rng);
    double acc = 0.0;
    for (const auto& tr : row) {
      acc += tr.prob;
      if (u < acc) return tr.next;
    }
    return row.back().next;
  }

  SamplePath generate_path(const StochasticPolicy& policy, Rng& rng, std::vector<PolicyEdit>&) const {
    SamplePath path;
    path.steps.reserve(n_stages);
    std::size_t s = draw_categorical(initial, rng);
    for (std::size_t t = 0; t < n_stages; ++t) {
      const std::size_t a = policy.sample_action(t, s, rng);
      path.steps.push_back({t, s, a, r(t, s, a), 0.0, true});
      if (t + 1 < n_stages) s = sample_next(t, s, a, rng);
    }
    return path;
  }
};

/// Exact quantities of a policy: state distribution pi_t(s), Q_t(s,a) = r + E[V_{t+1}], V_t(s), and J.
struct PolicyEvaluation {
  std::vector<std::vector<double>> pi;  // [t][s]
  std::vector<std::vector<double>> q;   // [t][s*A + a]
  std::vector<std::vector<double>> v;   // [t][s], with v[T] = 0
  double j = 0.0;
};

/// Action probabilities sigma/Sigma of every row, as one dense table [t][s*A + a].
inline std::vector<std::vector<double>> action_probabilities(const EnumeratedMdp& mdp,
                                                             const StochasticPolicy& policy) {
  if (policy.stages() != mdp.n_stages || policy.num_actions() != mdp.n_actions)
    throw ConfigError("policy shape does not match the MDP");
  std::vector<std::vector<double>> p(mdp.n_stages, std::vector<double>(mdp.n_states * mdp.n_actions, 0.0));
  for (std::size_t t = 0; t < mdp.n_stages; ++t) {
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      const PolicyRow row = policy.row(t, s);
      const double mass = row_mass(row);
      if (!(mass > 0.0))
        throw DeadState("stage " + std::to_string(t) + " state " + std::to_string(s));
      for (std::size_t a = 0; a < mdp.n_actions; ++a) p[t][s * mdp.n_actions + a] = row[a] / mass;
    }
  }
  return p;
}

inline PolicyEvaluation evaluate_exact(const EnumeratedMdp& mdp, const StochasticPolicy& policy) {
  mdp.check_size();
  const std::size_t T = mdp.n_stages, S = mdp.n_states, A = mdp.n_actions;
  const auto p = action_probabilities(mdp, policy);

  PolicyEvaluation ev;
  ev.v.assign(T + 1, std::vector<double>(S, 0.0));
  ev.q.assign(T, std::vector<double>(S * A, 0.0));
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double vs = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        double q = mdp.r(t, s, a);
        for (const auto& tr : mdp.next(t, s, a)) q += tr.prob * ev.v[t + 1][tr.next];
        ev.q[t][s * A + a] = q;
        vs += p[t][s * A + a] * q;
      }
      ev.v[t][s] = vs;
    }
  }

  ev.pi.assign(T, std::vector<double>(S, 0.0));
  ev.pi[0] = mdp.initial;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double ps = ev.pi[t][s];
      if (ps == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double pa = ps * p[t][s * A + a];
        if (pa == 0.0) continue;
        for (const auto& tr : mdp.next(t, s, a)) ev.pi[t + 1][tr.next] += pa * tr.prob;
      }
    }
  }

  for (std::size_t s = 0; s < S; ++s) ev.j += mdp.initial[s] * ev.v[0][s];
  return ev;
}

inline double expected_cost(const EnumeratedMdp& mdp, const StochasticPolicy& policy) {
  return evaluate_exact(mdp, policy).j;
}

/// Random dense MDP for property tests: each (t,s,a) moves to up to `branching` successors.
inline EnumeratedMdp make_random_mdp(std::size_t stages, std::size_t states, std::size_t actions, std::uint64_t seed,
                                     std::size_t branching = 2) {
  EnumeratedMdp m(stages, states, actions);
  Rng rng(seed);
  m.initial[0] = 1.0;
  for (std::size_t t = 0; t < stages; ++t)
    for (std::size_t s = 0; s < states; ++s)
      for (std::size_t a = 0; a < actions; ++a) {
        m.r(t, s, a) = uniform01(rng);
        const std::size_t k = std::min(branching, states);
        std::vector<double> w(k);
        double total = 0.0;
        for (double& x : w) total += (x = 0.1 + uniform01(rng));
        std::vector<std::size_t> used;
        for (std::size_t i = 0; i < k; ++i) {
          std::size_t nxt = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(states));
          while (std::find(used.begin(), used.end(), nxt) != used.end()) nxt = (nxt + 1) % states;
          used.push_back(nxt);
          m.next(t, s, a).push_back({nxt, w[i] / total});
        }
      }
  return m;
}

/// Random policy with strictly positive entries and row mass `mass`.
inline StochasticPolicy make_random_policy(const EnumeratedMdp& m, std::uint64_t seed, double mass = 1.0) {
  StochasticPolicy p(m.n_stages, m.n_actions);
  Rng rng(seed);
  for (std::size_t t = 0; t < m.n_stages; ++t)
    for (std::size_t s = 0; s < m.n_states; ++s) {
      PolicyRow row(m.n_actions);
      double total = 0.0;
      for (double& x : row) total += (x = 0.05 + uniform01(rng));
      for (double& x : row) x *= mass / total;
      p.set_row(t, s, std::move(row));
    }
  return p;
}

}  // namespace hvacmdp
