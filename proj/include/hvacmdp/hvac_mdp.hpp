#pragma once

// The HVAC decision process: quantized state for the policy, continuous shadow state for
// the simulator, comfort-driven masking during rollouts, and scenario-based evaluation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hvacmdp/comfort.hpp"
#include "hvacmdp/error.hpp"
#include "hvacmdp/markov.hpp"
#include "hvacmdp/parallel.hpp"
#include "hvacmdp/path.hpp"
#include "hvacmdp/policy.hpp"
#include "hvacmdp/price.hpp"
#include "hvacmdp/spaces.hpp"
#include "hvacmdp/thermal.hpp"

namespace hvacmdp {

/// Initial-policy bands: actions whose one-step result leaves these ranges start at zero weight.
struct InitBands {
  bool enabled = true;
  Bounds temp{23.0, 28.0};
  Bounds rh{0.40, 0.70};
};

struct HvacModel {
  Building building;
  ComfortSettings comfort;
  std::size_t stages = 48;
  double dt = 1800.0;
  PriceSchedule price = PriceSchedule::parse("0-9:0.16,9-21:0.24,21-24:0.16");
  std::vector<double> solar;  // W/m2 per stage; empty means no solar gain
  double penalty = 0.0;       // comfort penalty; 0 selects default_penalty()

  double hour(std::size_t t) const { return static_cast<double>(t) * dt / 3600.0; }
  double solar_at(std::size_t t) const { return t < solar.size() ? solar[t] : 0.0; }
};

/// Ten times the cost of a full day at the highest price and the largest plausible power draw.
inline double default_penalty(const HvacModel& m) {
  const HvacParams& h = m.building.hvac;
  ContinuousState hot{28.0, 0.9, 28.0, 28.0};
  ExogenousSample exo{34.0, 1.0, 5.0, 0.0, m.price.max_price()};
  ControlInput u{h.fau_flow.hi, h.fau_temp.lo, h.fcu_flow.hi, h.fcu_temp.lo};
  const double kw = hvac_power(m.building, hot, exo, u).electrical(h.eta);
  return 10.0 * m.price.max_price() * kw * 24.0;
}

struct StepOutcome {
  ContinuousState next;
  double cost = 0.0;  // energy cost only
  double pmv = 0.0;
  bool comfortable = false;
};

enum class RolloutMode {
  Deploy,      // one draw per stage, comfort recorded but not enforced
  Regenerate,  // uncomfortable draws are masked and re-drawn
  Penalize,    // as Regenerate, but a stage with no comfortable action takes the least-bad one at penalized cost
};

using Scenario = std::vector<ExoLevels>;

struct EvaluationSummary {
  std::size_t scenarios = 0;
  std::size_t infeasible = 0;  // scenarios skipped because no comfortable action existed
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
  double comfort_frequency = 0.0;  // fraction of stages with PMV in band
  double comfortable_days = 0.0;   // fraction of scenarios comfortable at every stage
  std::vector<double> costs;       // per feasible scenario, in scenario order
  std::vector<double> by_scenario; // every scenario, NaN where it was dropped
  std::vector<double> pmv;         // every recorded stage PMV
};

/// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

class HvacMdp {
 public:
  HvacMdp(HvacModel model, StateSpace states, ActionSpace actions, MarkovChainSet chains, ExoLevels initial_exo,
          ContinuousState initial_state, InitBands bands = {})
      : model_(std::move(model)), states_(std::move(states)), actions_(std::move(actions)),
        chains_(std::move(chains)), initial_exo_(initial_exo), initial_state_(initial_state), bands_(bands),
        init_cache_(std::make_shared<InitCache>()) {
    model_.building.room.validate();
    model_.building.hvac.validate();
    if (!(model_.dt > 0.0)) throw ConfigError("dt must be positive");
    if (model_.penalty <= 0.0) model_.penalty = default_penalty(model_);
    chains_.validate();
    if (chains_.stages() != model_.stages || states_.stages() != model_.stages)
      throw GridMismatch("chains, state space and model disagree on the stage count");
    const StateGrids& g = states_.grids();
    if (!(g.t_out == chains_.temp_grid && g.rh_out == chains_.humid_grid && g.occ == chains_.occ_grid))
      throw GridMismatch("state grids differ from the chain grids");
    if (initial_exo_.temp >= g.t_out.size() || initial_exo_.humid >= g.rh_out.size() || initial_exo_.occ >= g.occ.size())
      throw GridMismatch("initial exogenous levels outside the grids");
    if (!(initial_state_.rh_indoor >= 0.0 && initial_state_.rh_indoor <= 1.0))
      throw ConfigError("initial indoor RH must lie in [0,1]");
  }

  const HvacModel& model() const { return model_; }
  const StateSpace& states() const { return states_; }
  const ActionSpace& actions() const { return actions_; }
  const MarkovChainSet& chains() const { return chains_; }
  const ExoLevels& initial_exo() const { return initial_exo_; }
  const ContinuousState& initial_state() const { return initial_state_; }
  const InitBands& bands() const { return bands_; }

  std::size_t stages() const { return model_.stages; }
  std::size_t num_actions() const { return actions_.size(); }
  double penalty() const { return model_.penalty; }

  ExogenousSample exogenous(std::size_t t, const ExoLevels& e) const {
    const StateGrids& g = states_.grids();
    return {g.t_out.value(e.temp), g.rh_out.value(e.humid), g.occ.value(e.occ), model_.solar_at(t),
            model_.price.at_hour(model_.hour(t))};
  }

  std::size_t state_index(std::size_t t, const ExoLevels& e, const ContinuousState& x) const {
    const StateGrids& g = states_.grids();
    const StateTuple tup{e.temp, e.humid, g.t_in.level(x.t_indoor), g.rh_in.level(x.rh_indoor), e.occ};
    return states_.encode(states_.clamp_to_active(t, tup));
  }

  /// Applies one action for one stage; comfort is judged on the resulting indoor condition.
  StepOutcome simulate(std::size_t t, const ExoLevels& e, const ContinuousState& x, std::size_t action) const {
    const ExogenousSample exo = exogenous(t, e);
    const ControlInput u = actions_.decode(action);
    StepOutcome out;
    out.next = step_dynamics(model_.building, x, exo, u, model_.dt);
    out.cost = stage_cost(model_.building, x, exo, u, model_.dt);
    const ComfortCheck c = check_comfort(model_.comfort, out.next.t_indoor, out.next.rh_indoor);
    out.pmv = c.pmv;
    out.comfortable = c.comfortable;
    return out;
  }

  /// Penalized cost used to rank actions when a row has no weight left; violations are
  /// ordered by their distance from the band.
  double penalized_cost(const StepOutcome& o) const {
    if (o.comfortable) return o.cost;
    const ComfortBand& b = model_.comfort.band;
    const double excess = o.pmv < b.pmv_low ? b.pmv_low - o.pmv : o.pmv - b.pmv_high;
    return o.cost + model_.penalty * (1.0 + excess);
  }

  /// Action with the lowest penalized cost from the current shadow state (lowest index on ties).
  std::pair<std::size_t, StepOutcome> least_bad_action(std::size_t t, const ExoLevels& e,
                                                       const ContinuousState& x) const {
    std::size_t best = 0;
    StepOutcome best_out;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < num_actions(); ++a) {
      const StepOutcome o = simulate(t, e, x, a);
      const double c = penalized_cost(o);
      if (c < best_cost) {
        best_cost = c;
        best = a;
        best_out = o;
      }
    }
    return {best, best_out};
  }

  /// Representative continuous state of a grid state: level values, walls at the air temperature.
  ContinuousState representative(std::size_t s) const {
    const StateTuple tup = states_.decode(s);
    const StateGrids& g = states_.grids();
    const double ta = g.t_in.value(tup.t_in);
    return {ta, std::clamp(g.rh_in.value(tup.rh_in), 0.0, 1.0), ta, ta};
  }

  /// Initial row: uniform with unit mass over the actions whose one-step result from the
  /// representative state stays inside the bands; all zero if none does.
  PolicyRow initial_row(std::size_t t, std::size_t s) const {
    const std::size_t A = num_actions();
    if (!bands_.enabled) return uniform_row(A);
    const std::uint64_t key = static_cast<std::uint64_t>(t) * states_.size() + s;
    {
      std::shared_lock lock(init_cache_->mutex);
      const auto it = init_cache_->rows.find(key);
      if (it != init_cache_->rows.end()) return it->second;
    }
    const StateTuple tup = states_.decode(s);
    const ExoLevels e{tup.t_out, tup.rh_out, tup.occ};
    const ContinuousState x = representative(s);
    PolicyRow row(A, 0.0);
    std::size_t kept = 0;
    for (std::size_t a = 0; a < A; ++a) {
      const ContinuousState nx = step_dynamics(model_.building, x, exogenous(t, e), actions_.decode(a), model_.dt);
      if (bands_.temp.contains(nx.t_indoor) && bands_.rh.contains(nx.rh_indoor)) {
        row[a] = 1.0;
        ++kept;
      }
    }
    for (double& w : row) w = kept ? w / static_cast<double>(kept) : 0.0;
    std::unique_lock lock(init_cache_->mutex);
    init_cache_->rows.emplace(key, row);
    return row;
  }

  /// The returned policy refers back to this object, which must outlive it and stay in place.
  StochasticPolicy initial_policy() const {
    return StochasticPolicy(stages(), num_actions(), [this](std::size_t t, std::size_t s) { return initial_row(t, s); });
  }

  Scenario sample_scenario(Rng& rng) const { return sample_exogenous(chains_, rng, initial_exo_); }

  std::vector<Scenario> scenarios(std::size_t n, std::uint64_t seed) const {
    std::vector<Scenario> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(derive_seed(seed, 0x5ce7a210, i));
      out.push_back(sample_scenario(rng));
    }
    return out;
  }

  /// Simulates one day of `scenario` under `policy`. In Regenerate mode uncomfortable draws are
  /// masked (recorded in `edits`) and re-drawn; an emptied row revives its least-bad action, and
  /// InfeasibleError is thrown if even that is uncomfortable (Penalize mode takes it at penalized cost
  /// instead). Deploy mode never edits.
  SamplePath rollout(const StochasticPolicy& policy, const Scenario& scenario, Rng& rng, RolloutMode mode,
                     std::vector<PolicyEdit>* edits = nullptr) const {
    if (scenario.size() != stages()) throw GridMismatch("scenario length differs from the horizon");
    SamplePath path;
    path.steps.reserve(stages());
    ContinuousState x = initial_state_;
    for (std::size_t t = 0; t < stages(); ++t) {
      const ExoLevels& e = scenario[t];
      const std::size_t s = state_index(t, e, x);
      PolicyRow row = policy.row(t, s);
      std::size_t a = 0;
      StepOutcome out;
      for (;;) {
        if (row_mass(row) == 0.0) {
          std::tie(a, out) = least_bad_action(t, e, x);
          if (mode == RolloutMode::Deploy) break;
          if (out.comfortable) {
            if (edits) edits->push_back({PolicyEdit::Kind::Revive, t, s, a});
          } else if (mode == RolloutMode::Regenerate) {
            throw InfeasibleError("no comfortable action at stage " + std::to_string(t) + ", state " +
                                  std::to_string(s));
          } else {
            out.cost = penalized_cost(out);
          }
          break;
        }
        a = sample_from_row(row, rng);
        out = simulate(t, e, x, a);
        if (out.comfortable || mode == RolloutMode::Deploy) break;
        row[a] = 0.0;
        if (edits) edits->push_back({PolicyEdit::Kind::Mask, t, s, a});
      }
      path.steps.push_back({t, s, a, out.cost, out.pmv, out.comfortable});
      x = out.next;
    }
    return path;
  }

  /// Learning rollout: a fresh scenario from the chains, then a day in the learning mode.
  SamplePath generate_path(const StochasticPolicy& policy, Rng& rng, std::vector<PolicyEdit>& edits) const {
    const Scenario sc = sample_scenario(rng);
    return rollout(policy, sc, rng, learning_mode_, &edits);
  }

  /// Regenerate (the default) drops days that reach a stage without a comfortable action;
  /// Penalize keeps them and charges the penalty there.
  void set_learning_mode(RolloutMode mode) {
    if (mode == RolloutMode::Deploy) throw ConfigError("learning rollouts must enforce comfort");
    learning_mode_ = mode;
  }
  RolloutMode learning_mode() const { return learning_mode_; }

  /// Cost and comfort statistics of `policy` over fixed scenarios (policy draws seeded per scenario).
  EvaluationSummary evaluate(const StochasticPolicy& policy, const std::vector<Scenario>& scenarios, RolloutMode mode,
                             std::uint64_t seed, std::size_t workers = 1) const {
    if (scenarios.empty()) throw ConfigError("evaluation needs at least one scenario");
    std::vector<std::optional<SamplePath>> paths(scenarios.size());
    parallel_for(scenarios.size(), workers, [&](std::size_t i) {
      Rng rng(derive_seed(seed, 0xe7a1, i));
      try {
        paths[i] = rollout(policy, scenarios[i], rng, mode);
      } catch (const InfeasibleError&) {
        paths[i].reset();
      }
    });
    return summarize(paths, model_.comfort.band);
  }

  static EvaluationSummary summarize(const std::vector<std::optional<SamplePath>>& paths, const ComfortBand&) {
    EvaluationSummary sum;
    sum.scenarios = paths.size();
    std::size_t stages = 0, comfortable = 0, good_days = 0;
    for (const auto& p : paths) {
      if (!p) {
        ++sum.infeasible;
        sum.by_scenario.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      sum.costs.push_back(p->total_cost());
      sum.by_scenario.push_back(sum.costs.back());
      bool all = true;
      for (const auto& st : p->steps) {
        ++stages;
        comfortable += st.comfortable;
        all = all && st.comfortable;
        sum.pmv.push_back(st.pmv);
      }
      good_days += all;
    }
    if (sum.costs.empty()) throw NoPaths("every evaluation scenario was infeasible");
    const double n = static_cast<double>(sum.costs.size());
    for (double c : sum.costs) sum.mean += c / n;
    double var = 0.0;
    for (double c : sum.costs) var += (c - sum.mean) * (c - sum.mean);
    sum.stddev = sum.costs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    std::vector<double> sorted = sum.costs;
    std::sort(sorted.begin(), sorted.end());
    sum.min = sorted.front();
    sum.max = sorted.back();
    sum.q05 = quantile_sorted(sorted, 0.05);
    sum.q25 = quantile_sorted(sorted, 0.25);
    sum.q50 = quantile_sorted(sorted, 0.50);
    sum.q75 = quantile_sorted(sorted, 0.75);
    sum.q95 = quantile_sorted(sorted, 0.95);
    sum.comfort_frequency = static_cast<double>(comfortable) / static_cast<double>(stages);
    sum.comfortable_days = static_cast<double>(good_days) / n;
    return sum;
  }

 private:
  struct InitCache {
    std::shared_mutex mutex;
    std::unordered_map<std::uint64_t, PolicyRow> rows;
  };

  HvacModel model_;
  StateSpace states_;
  ActionSpace actions_;
  MarkovChainSet chains_;
  ExoLevels initial_exo_;
  ContinuousState initial_state_;
  InitBands bands_;
  RolloutMode learning_mode_ = RolloutMode::Regenerate;
  std::shared_ptr<InitCache> init_cache_;
};

static_assert(PathEnvironment<HvacMdp>);
static_assert(PathEnvironment<EnumeratedMdp>);

}  // namespace hvacmdp
