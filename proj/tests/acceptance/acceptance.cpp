// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hvacmdp/config.hpp"
#include "hvacmdp/gbpi.hpp"
#include "hvacmdp/io.hpp"
#include "hvacmdp/oracle.hpp"
#include "hvacmdp/tiny_mdp.hpp"
#include "../support/oracles.hpp"

using namespace hvacmdp;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Largest |Sigma after - Sigma before| over all rows of an enumerated policy.
double mass_change(const StochasticPolicy& before, const StochasticPolicy& after, std::size_t states) {
  double worst = 0.0;
  for (std::size_t t = 0; t < before.stages(); ++t)
    for (std::size_t s = 0; s < states; ++s) worst = std::max(worst, std::abs(after.mass(t, s) - before.mass(t, s)));
  return worst;
}

struct TinyRun {
  GbpiResult result;
  double worst_mass_change = 0.0;
  std::size_t clamped = 0;
  double seconds = 0.0;
};

// GBPI on the tiny MDP with every cost measured by the forward-propagation oracle and every
// row mass compared between consecutive iterates.
TinyRun run_tiny(const TinyMdp& tiny, const GbpiConfig& cfg, bool exact) {
  const EnumeratedMdp& m = tiny.mdp;
  TinyRun run;
  StochasticPolicy prev;
  bool have_prev = false;
  auto gradient = [&](StochasticPolicy& p, std::size_t k) {
    if (have_prev) run.worst_mass_change = std::max(run.worst_mass_change, mass_change(prev, p, m.n_states));
    prev = p;
    have_prev = true;
    if (exact) return exact_gradient(m, p);
    return estimate_gradient(m, p, cfg.mc(), cfg.seed, k);
  };
  auto cost = [&](const StochasticPolicy& p) { return oracle::forward_cost(m, p); };
  const auto t0 = std::chrono::steady_clock::now();
  run.result = run_gbpi(tiny_initial_policy(tiny, TinyMdpOptions{}.penalty), gradient, cost, cfg);
  run.seconds = seconds_since(t0);
  for (const auto& r : run.result.trace) run.clamped += r.clamped_rows;
  return run;
}

}  // namespace

int main() {
  const TinyMdp tiny = build_tiny_mdp();
  const EnumeratedMdp& m = tiny.mdp;
  const double j_star = oracle::optimal_value(m);

  GbpiConfig exact_cfg;
  exact_cfg.epsilon = 1e-12;
  exact_cfg.max_iterations = 3000;
  exact_cfg.cost_scale = 1e6;
  exact_cfg.max_decrease = 0.9;
  const TinyRun ex = run_tiny(tiny, exact_cfg, true);

  GbpiConfig mc_cfg;
  mc_cfg.n_paths = 10000;
  mc_cfg.epsilon = 1e-9;
  mc_cfg.max_iterations = 1000;
  mc_cfg.min_visits = 5;
  mc_cfg.cost_scale = 1e6;
  mc_cfg.max_decrease = 0.5;
  mc_cfg.seed = 1;
  const TinyRun mc = run_tiny(tiny, mc_cfg, false);

  // Row mass.
  report(ex.worst_mass_change <= 1e-9 && mc.worst_mass_change <= 1e-9, "row mass preserved by every update",
         fmt("max |dSigma| %.2e over %zu exact iterations, %.2e over %zu sampled iterations; clamped rows %zu/%zu",
             ex.worst_mass_change, ex.result.trace.size(), mc.worst_mass_change, mc.result.trace.size(), ex.clamped,
             mc.clamped));

  // Monotone descent with exact gradients.
  {
    std::size_t violations = 0;
    double worst_rise = 0.0;
    const auto& tr = ex.result.trace;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      const double rise = tr[k].mean_cost - tr[k - 1].mean_cost;
      worst_rise = std::max(worst_rise, rise);
      violations += rise > 1e-12;
    }
    const double last_rise = ex.result.final_cost - tr.back().mean_cost;
    violations += last_rise > 1e-12;
    report(violations == 0 && ex.seconds < 10.0, "monotone descent with exact gradients",
           fmt("%zu iterations, %zu increases above 1e-12 (largest step change %+.2e), %.2f s", tr.size(), violations,
               worst_rise, ex.seconds));
  }

  // Optimality.
  {
    const double gap_exact = std::abs(ex.result.final_cost - j_star);
    const double rel_mc = (mc.result.final_cost - j_star) / j_star;
    report(gap_exact <= 1e-6 && std::abs(rel_mc) <= 0.02 && mc.seconds < 60.0, "convergence to the DP optimum",
           fmt("J* %.9f; exact run %.9f (|gap| %.1e); sampled run %.9f (relative gap %.2f%%, %.1f s)", j_star,
               ex.result.final_cost, gap_exact, mc.result.final_cost, 100.0 * rel_mc, mc.seconds));
  }

  // Gradient correctness.
  {
    const StochasticPolicy p = make_random_policy(m, 3);
    const GradientEstimate g = exact_gradient(m, p);
    double worst_fd = 0.0;
    std::size_t entries = 0;
    for (std::size_t t = 0; t < m.n_stages; ++t)
      for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a) {
          worst_fd = std::max(worst_fd, std::abs(g.get(t, s, a) - oracle::fd_gradient(m, p, t, s, a)));
          ++entries;
        }

    const EnumeratedMdp small = make_random_mdp(2, 2, 2, 1);
    StochasticPolicy q = make_random_policy(small, 2);
    const GradientEstimate exact_small = exact_gradient(small, q);
    McOptions opt;
    opt.n_paths = 10000;
    opt.min_visits = 100;
    const GradientEstimate est = estimate_gradient(small, q, opt, 11);
    double worst_rel = 0.0;
    std::size_t checked = 0;
    for (std::size_t t = 0; t < 2; ++t)
      for (const auto& [s, row] : est.rows[t])
        for (std::size_t a = 0; a < 2; ++a) {
          if (row.action_visits[a] < 100) continue;
          const double e = exact_small.get(t, s, a);
          worst_rel = std::max(worst_rel, std::abs(row.grad[a] - e) / std::abs(e));
          ++checked;
        }
    report(worst_fd <= 1e-6 && worst_rel <= 0.05 && checked > 0, "gradient against finite differences and sampling",
           fmt("tiny MDP: max |exact - central difference| %.2e over %zu entries; 2x2x2 MDP: max relative error of "
               "the 1e4-path estimate %.2f%% over %zu entries",
               worst_fd, entries, 100.0 * worst_rel, checked));
  }

  // dp/dsigma identity.
  {
    Rng rng(99);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 24);
      std::vector<double> row(n);
      for (double& x : row) x = uniform01(rng);
      for (std::size_t a = 0; a < n; ++a) {
        double total = 0.0;
        for (std::size_t b = 0; b < n; ++b) total += dp_dsigma(row, a, b);
        worst = std::max(worst, std::abs(total));
      }
    }
    report(worst <= 1e-12, "derivative of action probabilities sums to zero",
           fmt("max |sum_b dp(b)/dsigma(a)| %.2e over 1000 random rows", worst));
  }

  // Performance difference.
  {
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
      const StochasticPolicy mu = make_random_policy(m, 1000 + k, 0.3 + 0.01 * static_cast<double>(k));
      const StochasticPolicy sigma = make_random_policy(m, 2000 + k);
      const double direct = oracle::forward_cost(m, mu) - oracle::forward_cost(m, sigma);
      worst = std::max(worst, std::abs(performance_difference(m, mu, sigma) - direct));
    }
    report(worst <= 1e-10, "performance difference formula",
           fmt("max |formula - (J(mu) - J(sigma))| %.2e over 50 policy pairs", worst));
  }

  // PMV.
  {
    double worst = 0.0;
    std::size_t n = 0;
    for (double ta = 20.0; ta <= 30.0 + 1e-9; ta += 1.0)
      for (double rh = 0.3; rh <= 0.7 + 1e-9; rh += 0.1) {
        PmvInputs in;
        in.t_air = ta;
        in.t_radiant = ta + 2.0;
        in.rh = rh;
        worst = std::max(worst, std::abs(compute_pmv(in) - oracle::iso_pmv(ta, ta + 2.0, 0.2, rh, 1.0, 1.0)));
        ++n;
      }
    std::size_t non_monotone = 0;
    const ComfortSettings c;
    for (double rh = 0.3; rh <= 0.7 + 1e-9; rh += 0.1)
      for (double ta = 20.0; ta < 30.0 - 1e-9; ta += 0.5)
        non_monotone += !(check_comfort(c, ta + 0.5, rh).pmv > check_comfort(c, ta, rh).pmv);
    report(worst <= 0.01 && non_monotone == 0, "PMV against the reference listing",
           fmt("max deviation %.4f over %zu conditions; %zu monotonicity breaks on the 0.5 degC grid", worst, n,
               non_monotone));
  }

  // Case II: learn, evaluate, compare with the perfect-information oracle.
  {
    const ExperimentConfig cfg = case_preset(2);
    const auto t0 = std::chrono::steady_clock::now();
    const auto env = build_environment(cfg, fit_exogenous(cfg));
    GbpiConfig g = cfg.gbpi;
    g.seed = cfg.learn_seed();
    const auto held_out = env->scenarios(cfg.evaluation.scenarios, cfg.trace_seed());
    const GbpiResult res = run_gbpi_mc(
        *env, env->initial_policy(),
        [&](const StochasticPolicy& p) { return env->evaluate(p, held_out, RolloutMode::Deploy, cfg.trace_seed()).mean; },
        g);
    const double learn_seconds = seconds_since(t0);

    const auto scenarios = env->scenarios(cfg.evaluation.scenarios, cfg.eval_seed());
    const EvaluationSummary deployed = env->evaluate(res.policy, scenarios, RolloutMode::Deploy, cfg.eval_seed());

    // Sample paths drawn the way the learner draws them.
    StochasticPolicy replay = res.policy;
    Rng rng(derive_seed(cfg.seed, 0xacce));
    std::size_t paths = 0, dropped = 0, violations = 0;
    for (int i = 0; i < 1000; ++i) {
      std::vector<PolicyEdit> edits;
      try {
        const SamplePath p = env->generate_path(replay, rng, edits);
        ++paths;
        for (const auto& st : p.steps)
          violations += !st.comfortable || !is_comfortable(st.pmv, cfg.model.comfort.band);
      } catch (const InfeasibleError&) {
        ++dropped;
      }
      apply_edits(replay, edits);
    }
    report(deployed.comfort_frequency >= 0.85 && violations == 0 && paths > 0, "comfort on the Case II preset",
           fmt("comfort frequency %.4f over %zu scenarios (%zu x %zu stages); %zu learning paths with %zu out-of-band "
               "stages (%zu days dropped as infeasible)",
               deployed.comfort_frequency, deployed.scenarios, deployed.scenarios, env->stages(), paths, violations,
               dropped));

    const double final_cost = res.final_cost;
    double worst_after_15 = 0.0;
    for (const auto& r : res.trace)
      if (r.k >= 15) worst_after_15 = std::max(worst_after_15, std::abs(r.mean_cost - final_cost) / final_cost);
    const bool reached = res.trace.size() > 15;
    report(reached && worst_after_15 <= 0.05 && learn_seconds < 900.0, "convergence speed on Case II",
           fmt("initial %.4f, iteration 15 %.4f, final %.4f; max relative distance from final after iteration 15 "
               "%.2f%%; learn run %.1f s",
               res.trace.front().mean_cost, reached ? res.trace[15].mean_cost : NAN, final_cost,
               100.0 * worst_after_15, learn_seconds));

    std::vector<double> oracle_costs(scenarios.size(), std::nan(""));
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      try {
        oracle_costs[i] = solve_perfect_information(*env, scenarios[i], cfg.oracle).cost;
      } catch (const InfeasibleError&) {
      }
    }
    const GapReport gap = gap_report(deployed.by_scenario, oracle_costs);
    report(gap.gap_percent <= 20.0, "gap to the perfect-information oracle",
           fmt("policy %.4f vs oracle %.4f on %zu matched scenarios: gap %.2f%%",
               gap.policy_mean, gap.oracle_mean, gap.matched, gap.gap_percent));
  }

  // Fan law and chain estimation.
  {
    const HvacParams h;
    bool fan_ok = true;
    for (double f : {0.0, 0.5, 1.0}) {
      fan_ok = fan_ok && fan_power(h.fcu_rated_fan_power, f * h.fcu_rated_flow, h.fcu_rated_flow) ==
                             h.fcu_rated_fan_power * f * f * f;
      fan_ok = fan_ok && fan_power(h.fau_rated_fan_power, f * h.fau_rated_flow, h.fau_rated_flow) ==
                             h.fau_rated_fan_power * f * f * f;
    }
    Rng rng(4242);
    std::size_t bad_rows = 0, rows = 0;
    for (int k = 0; k < 1000; ++k) {
      const std::size_t levels = 1 + static_cast<std::size_t>(uniform01(rng) * 10);
      const std::size_t stages = 2 + static_cast<std::size_t>(uniform01(rng) * 20);
      const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 30);
      std::vector<std::vector<std::size_t>> seqs(n, std::vector<std::size_t>(stages));
      // Mix uniform noise with sticky runs so that some rows go unvisited.
      const bool sticky = uniform01(rng) < 0.5;
      for (auto& s : seqs)
        for (std::size_t t = 0; t < stages; ++t)
          s[t] = sticky && t > 0 && uniform01(rng) < 0.8 ? s[t - 1]
                                                          : static_cast<std::size_t>(uniform01(rng) * static_cast<double>(levels));
      const MarkovChain c = estimate_chain(seqs, levels, stages);
      for (const auto& mat : c.steps)
        for (std::size_t i = 0; i < levels; ++i) {
          double total = 0.0;
          bool nonneg = true;
          for (double x : mat.row(i)) {
            total += x;
            nonneg = nonneg && x >= 0.0;
          }
          bad_rows += !(nonneg && std::abs(total - 1.0) <= 1e-12);
          ++rows;
        }
    }
    report(fan_ok && bad_rows == 0, "fan cubic law and chain rows",
           fmt("fan power exact at 0, 1/2, 1 x rated flow: %s; %zu non-stochastic rows out of %zu from 1000 random "
               "datasets",
               fan_ok ? "yes" : "no", bad_rows, rows));
  }

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
