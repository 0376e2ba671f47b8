#pragma once

// A deliberately small HVAC decision process that can be enumerated exactly:
// 3 outdoor temp x 3 outdoor RH x 3 indoor temp x 3 indoor RH x 2 occupancy levels,
// 9 actions (FCU and FAU flow at three levels each), a few stages around midday.

#include <cstddef>
#include <map>
#include <vector>

#include "hvacmdp/comfort.hpp"
#include "hvacmdp/enumerated.hpp"
#include "hvacmdp/markov.hpp"
#include "hvacmdp/price.hpp"
#include "hvacmdp/spaces.hpp"
#include "hvacmdp/thermal.hpp"

namespace hvacmdp {

inline StateGrids tiny_state_grids() {
  return {LevelGrid(28.0, 2.0, 3), LevelGrid(0.5, 0.1, 3), LevelGrid(22.0, 1.0, 3), LevelGrid(0.45, 0.1, 3),
          LevelGrid(0.0, 2.0, 2)};
}

struct TinyMdpOptions {
  std::size_t stages = 8;
  double start_hour = 10.0;
  double dt = 1800.0;
  double solar = 50.0;    // W/m2
  double penalty = 1.0;   // added when the next indoor condition is uncomfortable
  PriceSchedule price = PriceSchedule::parse("0-9:0.16,9-21:0.24,21-24:0.16");
  Building building;
  ComfortSettings comfort;
  std::vector<double> fcu_flows{0.0, 0.03, 0.06};
  std::vector<double> fau_flows{0.0, 0.005, 0.01};
  double supply_temp = 15.0;
  StateGrids grids = tiny_state_grids();
};

struct TinyMdp {
  EnumeratedMdp mdp;
  StateSpace states;
  ActionSpace actions;
  std::size_t initial_state = 0;
};

/// Tridiagonal drift: stay with `stay`, otherwise move one level; end levels keep the missing share.
inline TransitionMatrix drift_matrix(std::size_t n, double stay) {
  TransitionMatrix m(n);
  const double move = (1.0 - stay) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = stay;
    if (i > 0) m(i, i - 1) = move; else m(i, i) += move;
    if (i + 1 < n) m(i, i + 1) = move; else m(i, i) += move;
  }
  return m;
}

inline TinyMdp build_tiny_mdp(const TinyMdpOptions& opt = {}) {
  TinyMdp tiny;
  tiny.states = StateSpace(opt.grids, opt.stages);
  for (const LevelGrid* lg : {&opt.grids.t_out, &opt.grids.rh_out, &opt.grids.t_in, &opt.grids.rh_in})
    if (lg->size() != 3) throw ConfigError("tiny MDP expects three levels per climate grid");
  if (opt.grids.occ.size() != 2) throw ConfigError("tiny MDP expects two occupancy levels");
  ActionLevels levels{opt.fau_flows, {opt.supply_temp}, opt.fcu_flows, {opt.supply_temp}};
  tiny.actions = ActionSpace(levels, opt.building.hvac);
  const StateGrids& g = tiny.states.grids();

  const TransitionMatrix temp_chain = drift_matrix(3, 0.6);
  const TransitionMatrix humid_chain = drift_matrix(3, 0.6);
  TransitionMatrix occ_chain(2);
  occ_chain(0, 0) = 0.7;
  occ_chain(0, 1) = 0.3;
  occ_chain(1, 0) = 0.2;
  occ_chain(1, 1) = 0.8;

  const std::size_t S = tiny.states.size(), A = tiny.actions.size();
  tiny.mdp = EnumeratedMdp(opt.stages, S, A);
  tiny.initial_state = tiny.states.encode({1, 1, 1, 1, 0});
  tiny.mdp.initial[tiny.initial_state] = 1.0;

  for (std::size_t t = 0; t < opt.stages; ++t) {
    const double price = opt.price.at_hour(opt.start_hour + static_cast<double>(t) * opt.dt / 3600.0);
    for (std::size_t s = 0; s < S; ++s) {
      const StateTuple tup = tiny.states.decode(s);
      const double ta = g.t_in.value(tup.t_in);
      const ContinuousState x{ta, g.rh_in.value(tup.rh_in), ta, ta};
      const ExogenousSample exo{g.t_out.value(tup.t_out), g.rh_out.value(tup.rh_out), g.occ.value(tup.occ), opt.solar,
                                price};
      for (std::size_t a = 0; a < A; ++a) {
        const ControlInput u = tiny.actions.decode(a);
        const ContinuousState nx = step_dynamics(opt.building, x, exo, u, opt.dt);
        const bool ok = check_comfort(opt.comfort, nx.t_indoor, nx.rh_indoor).comfortable;
        tiny.mdp.r(t, s, a) = stage_cost(opt.building, x, exo, u, opt.dt) + (ok ? 0.0 : opt.penalty);
        const std::size_t ti = g.t_in.level(nx.t_indoor), hi = g.rh_in.level(nx.rh_indoor);

        std::map<std::size_t, double> dist;
        for (std::size_t a2 = 0; a2 < 3; ++a2)
          for (std::size_t b2 = 0; b2 < 3; ++b2)
            for (std::size_t c2 = 0; c2 < 2; ++c2) {
              const double p = temp_chain(tup.t_out, a2) * humid_chain(tup.rh_out, b2) * occ_chain(tup.occ, c2);
              if (p > 0.0) dist[tiny.states.encode({a2, b2, ti, hi, c2})] += p;
            }
        auto& row = tiny.mdp.next(t, s, a);
        for (const auto& [nxt, p] : dist) row.push_back({nxt, p});
      }
    }
  }
  return tiny;
}

/// Uniform over the actions without an immediate comfort penalty (all actions if every one is penalized).
inline StochasticPolicy tiny_initial_policy(const TinyMdp& tiny, double penalty) {
  const EnumeratedMdp& m = tiny.mdp;
  StochasticPolicy p(m.n_stages, m.n_actions);
  for (std::size_t t = 0; t < m.n_stages; ++t)
    for (std::size_t s = 0; s < m.n_states; ++s) {
      PolicyRow row(m.n_actions, 0.0);
      std::size_t k = 0;
      for (std::size_t a = 0; a < m.n_actions; ++a)
        if (m.r(t, s, a) < penalty) {
          row[a] = 1.0;
          ++k;
        }
      if (k == 0) {
        row = uniform_row(m.n_actions);
      } else {
        for (double& w : row) w /= static_cast<double>(k);
      }
      p.set_row(t, s, std::move(row));
    }
  return p;
}

}  // namespace hvacmdp
