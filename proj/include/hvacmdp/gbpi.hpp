#pragma once

// Gradient-based policy iteration. The gradient of J with respect to an unnormalized
// policy entry sigma_t(s,a) is
//   dJ/dsigma(s,a) = pi_t(s) * sum_b dp(b|s)/dsigma(s,a) * (r_t(s,b) + V_t(s,b)),
// and the update uses the step size sigma(s,a)/Sigma(s), which leaves Sigma(s) unchanged.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvacmdp/enumerated.hpp"
#include "hvacmdp/error.hpp"
#include "hvacmdp/parallel.hpp"
#include "hvacmdp/path.hpp"
#include "hvacmdp/policy.hpp"
#include "hvacmdp/random.hpp"

namespace hvacmdp {

/// d p(b|s) / d sigma(s,a) for p(b|s) = sigma(s,b) / Sigma(s).
inline double dp_dsigma(std::span<const double> sigma, std::size_t a, std::size_t b) {
  const double mass = row_mass(sigma);
  if (b == a) return (mass - sigma[a]) / (mass * mass);
  return -sigma[b] / (mass * mass);
}

/// Closed form of the gradient for one row: pi / Sigma^2 * (Sigma * Q(a) - sum_b sigma_b Q(b)).
inline std::vector<double> gradient_row(double pi, std::span<const double> sigma, std::span<const double> q) {
  const double mass = row_mass(sigma);
  std::vector<double> g(sigma.size(), 0.0);
  if (!(mass > 0.0) || pi == 0.0) return g;
  double weighted = 0.0;
  for (std::size_t b = 0; b < sigma.size(); ++b) weighted += sigma[b] * q[b];
  const double scale = pi / (mass * mass);
  for (std::size_t a = 0; a < sigma.size(); ++a) g[a] = scale * (mass * q[a] - weighted);
  return g;
}

/// Building blocks of one (stage, state) row of a gradient estimate.
struct RowEstimate {
  std::size_t visits = 0;                   // |I_t(s)|
  std::vector<std::size_t> action_visits;   // |I_t(s,a)|
  double pi = 0.0;                          // estimated or exact state probability
  std::vector<double> r;                    // stage cost r_t(s,a)
  std::vector<double> v;                    // cost-to-go after (s,a)
  std::vector<double> grad;                 // dJ/dsigma_t(s,a); 0 where untrusted
  std::vector<bool> trusted;
};

struct GradientEstimate {
  std::size_t n_actions = 0;
  std::size_t paths = 0;             // feasible paths used (0 for exact gradients)
  std::size_t infeasible_paths = 0;
  std::vector<std::map<std::size_t, RowEstimate>> rows;  // [t] state -> row

  double get(std::size_t t, std::size_t s, std::size_t a) const {
    const auto it = rows.at(t).find(s);
    return it == rows[t].end() ? 0.0 : it->second.grad.at(a);
  }

  double norm() const {
    double sq = 0.0;
    for (const auto& m : rows)
      for (const auto& [s, row] : m)
        for (double g : row.grad) sq += g * g;
    return std::sqrt(sq);
  }

  std::size_t entries() const {
    std::size_t n = 0;
    for (const auto& m : rows)
      for (const auto& [s, row] : m)
        for (bool ok : row.trusted) n += ok;
    return n;
  }
};

/// Exact gradient of J on an enumerated MDP (every state, every action).
inline GradientEstimate exact_gradient(const EnumeratedMdp& mdp, const StochasticPolicy& policy) {
  mdp.check_size();
  const PolicyEvaluation ev = evaluate_exact(mdp, policy);
  const std::size_t A = mdp.n_actions;
  GradientEstimate est;
  est.n_actions = A;
  est.rows.resize(mdp.n_stages);
  for (std::size_t t = 0; t < mdp.n_stages; ++t) {
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      RowEstimate row;
      row.pi = ev.pi[t][s];
      row.action_visits.assign(A, 0);
      row.r.resize(A);
      row.v.resize(A);
      std::vector<double> q(A);
      for (std::size_t a = 0; a < A; ++a) {
        row.r[a] = mdp.r(t, s, a);
        q[a] = ev.q[t][s * A + a];
        row.v[a] = q[a] - row.r[a];
      }
      row.grad = gradient_row(row.pi, policy.row(t, s), q);
      row.trusted.assign(A, true);
      est.rows[t].emplace(s, std::move(row));
    }
  }
  return est;
}

struct McOptions {
  std::size_t n_paths = 1000;
  std::size_t min_visits = 10;
  std::size_t wave_size = 256;  // paths drawn against one policy snapshot
  std::size_t workers = 1;
};

namespace detail {

struct RowCounts {
  std::size_t visits = 0;
  std::vector<std::size_t> n;
  std::vector<double> sum_r;
  std::vector<double> sum_v;
};

inline void accumulate_path(std::vector<std::map<std::size_t, RowCounts>>& counts, const SamplePath& path,
                            std::size_t n_actions) {
  double tail = 0.0;  // cost of the stages after the current one
  for (std::size_t k = path.steps.size(); k-- > 0;) {
    const PathStep& st = path.steps[k];
    RowCounts& rc = counts.at(st.stage)[st.state];
    if (rc.n.empty()) {
      rc.n.assign(n_actions, 0);
      rc.sum_r.assign(n_actions, 0.0);
      rc.sum_v.assign(n_actions, 0.0);
    }
    ++rc.visits;
    ++rc.n[st.action];
    rc.sum_r[st.action] += st.cost;
    rc.sum_v[st.action] += tail;
    tail += st.cost;
  }
}

}  // namespace detail

/// Turns visit counts into a gradient. Actions below `min_visits` are untrusted: their Q is set to the
/// sigma-weighted mean of the trusted ones, which gives them zero gradient and keeps Sigma fixed.
inline RowEstimate assemble_row(const detail::RowCounts& rc, std::size_t n_paths, std::span<const double> sigma,
                                std::size_t min_visits) {
  const std::size_t A = sigma.size();
  RowEstimate row;
  row.visits = rc.visits;
  row.action_visits = rc.n;
  row.pi = static_cast<double>(rc.visits) / static_cast<double>(n_paths);
  row.r.assign(A, 0.0);
  row.v.assign(A, 0.0);
  row.trusted.assign(A, false);
  row.grad.assign(A, 0.0);

  std::vector<double> q(A, 0.0);
  double trusted_mass = 0.0, trusted_q = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    if (rc.n[a] == 0) continue;
    row.r[a] = rc.sum_r[a] / static_cast<double>(rc.n[a]);
    row.v[a] = rc.sum_v[a] / static_cast<double>(rc.n[a]);
    if (rc.n[a] >= min_visits) {
      row.trusted[a] = true;
      q[a] = row.r[a] + row.v[a];
      trusted_mass += sigma[a];
      trusted_q += sigma[a] * q[a];
    }
  }
  if (!(trusted_mass > 0.0)) {
    row.trusted.assign(A, false);
    return row;
  }
  const double baseline = trusted_q / trusted_mass;
  for (std::size_t a = 0; a < A; ++a)
    if (!row.trusted[a]) q[a] = baseline;
  row.grad = gradient_row(row.pi, sigma, q);
  for (std::size_t a = 0; a < A; ++a)
    if (!row.trusted[a]) row.grad[a] = 0.0;
  return row;
}

/// Monte-Carlo gradient estimate from sampled paths. Policy edits requested by rollouts
/// (masking, reviving) are applied to `policy` between waves, in path order.
template <PathEnvironment Env>
GradientEstimate estimate_gradient(const Env& env, StochasticPolicy& policy, const McOptions& opt,
                                   std::uint64_t seed, std::uint64_t iteration = 0) {
  if (opt.n_paths == 0) throw ConfigError("n_paths must be at least 1");
  const std::size_t T = env.stages(), A = env.num_actions();
  std::vector<std::map<std::size_t, detail::RowCounts>> counts(T);

  struct Slot {
    std::optional<SamplePath> path;
    std::vector<PolicyEdit> edits;
  };
  const std::size_t wave = std::max<std::size_t>(1, opt.wave_size);
  std::size_t feasible = 0, infeasible = 0;
  for (std::size_t start = 0; start < opt.n_paths; start += wave) {
    const std::size_t n = std::min(wave, opt.n_paths - start);
    std::vector<Slot> slots(n);
    const StochasticPolicy& snapshot = policy;
    parallel_for(n, opt.workers, [&](std::size_t i) {
      Rng rng(derive_seed(seed, iteration, start + i));
      try {
        slots[i].path = env.generate_path(snapshot, rng, slots[i].edits);
      } catch (const InfeasibleError&) {
        slots[i].path.reset();
      }
    });
    for (auto& slot : slots) {
      apply_edits(policy, slot.edits);
      if (!slot.path) {
        ++infeasible;
        continue;
      }
      ++feasible;
      detail::accumulate_path(counts, *slot.path, A);
    }
  }
  if (feasible == 0) throw NoPaths(std::to_string(infeasible) + " rollouts infeasible");

  GradientEstimate est;
  est.n_actions = A;
  est.paths = feasible;
  est.infeasible_paths = infeasible;
  est.rows.resize(T);
  for (std::size_t t = 0; t < T; ++t)
    for (const auto& [s, rc] : counts[t])
      est.rows[t].emplace(s, assemble_row(rc, feasible, policy.row(t, s), opt.min_visits));
  return est;
}

/// Norm of the step direction (sigma/Sigma) * dJ/dsigma. At a constrained optimum the raw gradient
/// stays nonzero on entries the step cannot move (sigma = 0); this quantity vanishes there.
inline double step_norm(const StochasticPolicy& policy, const GradientEstimate& grad) {
  double sq = 0.0;
  for (std::size_t t = 0; t < grad.rows.size(); ++t)
    for (const auto& [s, row] : grad.rows[t]) {
      const PolicyRow sigma = policy.row(t, s);
      const double mass = row_mass(sigma);
      if (!(mass > 0.0)) continue;
      for (std::size_t a = 0; a < row.grad.size(); ++a) {
        const double d = sigma[a] / mass * row.grad[a];
        sq += d * d;
      }
    }
  return std::sqrt(sq);
}

struct UpdateStats {
  std::size_t rows = 0;
  std::size_t clamped_rows = 0;
  std::size_t damped_rows = 0;
  double max_mass_drift = 0.0;  // over rows where no clamping fired
};

/// Restores entries to [0,1] and the row mass to `mass`, leaving zeros at zero.
inline void clamp_and_rescale(std::vector<double>& row, double mass) {
  for (int pass = 0; pass < 64; ++pass) {
    double total = 0.0;
    for (double& x : row) {
      x = std::clamp(x, 0.0, 1.0);
      total += x;
    }
    if (!(total > 0.0) || std::abs(total - mass) <= 1e-15 * std::max(1.0, mass)) return;
    // Spread the deficit or excess over entries that can still move.
    double free_total = 0.0;
    for (double x : row)
      if (x > 0.0 && (x < 1.0 || total > mass)) free_total += x;
    if (!(free_total > 0.0)) return;
    const double factor = (free_total + mass - total) / free_total;
    for (double& x : row)
      if (x > 0.0 && (x < 1.0 || total > mass)) x *= factor;
  }
}

struct UpdateOptions {
  double cost_scale = 1.0;    // costs are expressed in units of 1/cost_scale, which enlarges the step
  double max_decrease = 0.0;  // in (0,1): shrink a row's step so no entry falls by more than this fraction
};

/// sigma <- sigma - (sigma / Sigma) * cost_scale * dJ/dsigma. Entries leaving [0,1] are clamped and the
/// row is rescaled to restore Sigma. With `max_decrease` set, a row whose step would remove more than that
/// fraction of any entry is scaled down first, so clamping cannot fire.
inline UpdateStats update_policy(StochasticPolicy& policy, const GradientEstimate& grad,
                                 const UpdateOptions& opt = {}) {
  if (!(opt.cost_scale > 0.0)) throw ConfigError("cost_scale must be positive");
  if (!(opt.max_decrease >= 0.0 && opt.max_decrease < 1.0)) throw ConfigError("max_decrease must lie in [0,1)");
  UpdateStats stats;
  std::vector<double> frac;
  for (std::size_t t = 0; t < grad.rows.size(); ++t) {
    for (const auto& [s, est] : grad.rows[t]) {
      bool any = false;
      for (double g : est.grad) any = any || g != 0.0;
      if (!any) continue;
      PolicyRow& row = policy.materialize(t, s);
      const double mass = row_mass(row);
      if (!(mass > 0.0)) continue;

      // Fractional decrease of each entry: sigma' = sigma * (1 - frac).
      frac.assign(row.size(), 0.0);
      double worst = 0.0;
      for (std::size_t a = 0; a < row.size(); ++a) {
        frac[a] = opt.cost_scale * est.grad[a] / mass;
        if (row[a] > 0.0) worst = std::max(worst, frac[a]);
      }
      if (opt.max_decrease > 0.0 && worst > opt.max_decrease) {
        const double shrink = opt.max_decrease / worst;
        for (double& f : frac) f *= shrink;
        ++stats.damped_rows;
      }

      bool clamped = false;
      for (std::size_t a = 0; a < row.size(); ++a) {
        row[a] -= row[a] * frac[a];
        clamped = clamped || row[a] < 0.0 || row[a] > 1.0;
      }
      ++stats.rows;
      if (clamped) {
        ++stats.clamped_rows;
        clamp_and_rescale(row, mass);
      } else {
        stats.max_mass_drift = std::max(stats.max_mass_drift, std::abs(row_mass(row) - mass));
      }
    }
  }
  return stats;
}

inline UpdateStats update_policy(StochasticPolicy& policy, const GradientEstimate& grad, double cost_scale) {
  return update_policy(policy, grad, UpdateOptions{cost_scale, 0.0});
}

struct GbpiConfig {
  std::size_t n_paths = 1000;
  double epsilon = 1e-6;
  std::size_t max_iterations = 30;
  std::size_t min_visits = 10;
  std::uint64_t seed = 1;
  double cost_scale = 1.0;
  double max_decrease = 0.0;  // 0 keeps plain clamp-and-rescale
  std::size_t workers = 1;
  std::size_t wave_size = 256;

  void validate() const {
    if (n_paths < 1) throw ConfigError("n_paths must be at least 1");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(cost_scale > 0.0)) throw ConfigError("cost_scale must be positive");
    if (!(max_decrease >= 0.0 && max_decrease < 1.0)) throw ConfigError("max_decrease must lie in [0,1)");
  }

  McOptions mc() const { return {n_paths, min_visits, wave_size, workers}; }
};

struct IterationRecord {
  std::size_t k = 0;
  double mean_cost = 0.0;     // policy cost before this iteration's update
  double grad_norm = 0.0;     // step_norm of the gradient
  std::size_t clamped_rows = 0;
  std::size_t damped_rows = 0;
  std::size_t updated_rows = 0;
  double max_mass_drift = 0.0;
  std::size_t paths = 0;
  std::size_t infeasible_paths = 0;
  double wall_seconds = 0.0;
};

struct GbpiResult {
  StochasticPolicy policy;
  std::vector<IterationRecord> trace;
  double final_cost = 0.0;
  bool converged = false;  // stopped on the gradient-norm test
};

/// Generic loop: `gradient(policy, k)` may edit the policy (masks); `cost(policy)` evaluates it.
/// The trace holds one record per gradient evaluation; `final_cost` is the cost of the returned policy.
template <class GradientFn, class CostFn>
GbpiResult run_gbpi(StochasticPolicy policy, GradientFn&& gradient, CostFn&& cost, const GbpiConfig& cfg,
                    const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  cfg.validate();
  GbpiResult res;
  for (std::size_t k = 0;; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.k = k;
    const GradientEstimate g = gradient(policy, k);
    rec.mean_cost = cost(policy);
    rec.grad_norm = step_norm(policy, g);
    rec.paths = g.paths;
    rec.infeasible_paths = g.infeasible_paths;
    const bool stop = rec.grad_norm <= cfg.epsilon;
    if (!stop && k < cfg.max_iterations) {
      const UpdateStats u = update_policy(policy, g, UpdateOptions{cfg.cost_scale, cfg.max_decrease});
      rec.clamped_rows = u.clamped_rows;
      rec.damped_rows = u.damped_rows;
      rec.updated_rows = u.rows;
      rec.max_mass_drift = u.max_mass_drift;
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.trace.push_back(rec);
    if (on_iteration) on_iteration(rec);
    if (stop) {
      res.converged = true;
      break;
    }
    if (k >= cfg.max_iterations) break;
  }
  res.final_cost = cost(policy);
  res.policy = std::move(policy);
  return res;
}

/// Exact-gradient learner on an enumerated MDP.
inline GbpiResult run_gbpi_exact(const EnumeratedMdp& mdp, StochasticPolicy initial, const GbpiConfig& cfg,
                                 const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  return run_gbpi(
      std::move(initial), [&](StochasticPolicy& p, std::size_t) { return exact_gradient(mdp, p); },
      [&](const StochasticPolicy& p) { return expected_cost(mdp, p); }, cfg, on_iteration);
}

/// Monte-Carlo learner; `cost` evaluates the policy on held-out scenarios.
template <PathEnvironment Env, class CostFn>
GbpiResult run_gbpi_mc(const Env& env, StochasticPolicy initial, CostFn&& cost, const GbpiConfig& cfg,
                       const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  return run_gbpi(
      std::move(initial),
      [&](StochasticPolicy& p, std::size_t k) { return estimate_gradient(env, p, cfg.mc(), cfg.seed, k); },
      std::forward<CostFn>(cost), cfg, on_iteration);
}

/// sum_t sum_s pi^mu_t(s) [ (r^mu_t(s) - r^sigma_t(s)) + sum_s' (P^mu - P^sigma)(s'|s) V^sigma_{t+1}(s') ],
/// which equals J(mu) - J(sigma).
inline double performance_difference(const EnumeratedMdp& mdp, const StochasticPolicy& mu,
                                     const StochasticPolicy& sigma) {
  mdp.check_size();
  const std::size_t T = mdp.n_stages, S = mdp.n_states, A = mdp.n_actions;
  const PolicyEvaluation ev_mu = evaluate_exact(mdp, mu);
  const PolicyEvaluation ev_sigma = evaluate_exact(mdp, sigma);
  const auto p_mu = action_probabilities(mdp, mu);
  const auto p_sigma = action_probabilities(mdp, sigma);
  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      const double w = ev_mu.pi[t][s];
      if (w == 0.0) continue;
      double term = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        const double dp = p_mu[t][s * A + a] - p_sigma[t][s * A + a];
        if (dp == 0.0) continue;
        double continuation = 0.0;
        for (const auto& tr : mdp.next(t, s, a)) continuation += tr.prob * ev_sigma.v[t + 1][tr.next];
        term += dp * (mdp.r(t, s, a) + continuation);
      }
      total += w * term;
    }
  }
  return total;
}

}  // namespace hvacmdp
