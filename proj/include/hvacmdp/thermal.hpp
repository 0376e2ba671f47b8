#pragma once

// Gray-box single-zone room model: air node, two interior walls, and a moisture
// balance, advanced by one explicit forward-difference step per decision stage.

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "hvacmdp/error.hpp"
#include "hvacmdp/psychro.hpp"

namespace hvacmdp {

struct RoomParams {
  double cp_air = 1012.0;        // J/(kg K)
  double m_air = 144.6;          // kg
  double m_wall_left = 7.2e3;    // kg
  double m_wall_right = 8.64e3;  // kg
  double c_wall = 1.05e3;        // J/(kg K)
  double h_glass = 2.5;          // W/(m2 K)
  double a_glass = 10.0;         // m2
  double h_wall = 0.8;           // W/(m2 K)
  double a_wall_left = 20.0;     // m2
  double a_wall_right = 24.0;    // m2
  double alpha_wall = 0.4;       // solar absorptance
  double q_occupant = 40.0;      // W per person
  double h_gen = 0.03e-3;        // kg/s moisture per person

  void validate() const {
    const double positives[] = {cp_air, m_air, m_wall_left, m_wall_right, c_wall, h_glass,
                                a_glass, h_wall, a_wall_left, a_wall_right};
    for (double v : positives)
      if (!(v > 0.0)) throw ConfigError("room parameters must be strictly positive");
    if (!(alpha_wall >= 0.0 && alpha_wall <= 1.0)) throw ConfigError("alpha_wall must lie in [0,1]");
    if (q_occupant < 0.0 || h_gen < 0.0) throw ConfigError("occupant gains must be non-negative");
  }
};

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x, double tol = 1e-12) const { return x >= lo - tol && x <= hi + tol; }
};

struct HvacParams {
  Bounds fau_flow{0.0, 0.01};   // kg/s
  Bounds fcu_flow{0.0, 0.10};   // kg/s
  Bounds fau_temp{12.0, 16.0};  // degC
  Bounds fcu_temp{12.0, 16.0};  // degC
  double fau_rated_flow = 0.01;       // kg/s
  double fcu_rated_flow = 0.05;       // kg/s
  double fau_rated_fan_power = 0.1;   // kW
  double fcu_rated_fan_power = 0.1;   // kW
  double eta = 1.0 / 2.7;             // 1/COP
  double fau_supply_saturation = 1.0; // RH cap of FAU supply air
  double device_heat_per_occupant = 100.0;  // W

  void validate() const {
    for (const Bounds* b : {&fau_flow, &fcu_flow, &fau_temp, &fcu_temp})
      if (!(b->lo <= b->hi)) throw ConfigError("HVAC bounds must satisfy lo <= hi");
    if (fau_flow.lo < 0.0 || fcu_flow.lo < 0.0) throw ConfigError("flow bounds must be non-negative");
    if (!(fau_rated_flow > 0.0 && fcu_rated_flow > 0.0 && fau_rated_fan_power > 0.0 &&
          fcu_rated_fan_power > 0.0))
      throw ConfigError("rated HVAC values must be positive");
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(fau_supply_saturation > 0.0 && fau_supply_saturation <= 1.0))
      throw ConfigError("FAU supply saturation must lie in (0,1]");
  }
};

struct Building {
  RoomParams room;
  HvacParams hvac;
};

struct ContinuousState {
  double t_indoor = 24.0;    // degC
  double rh_indoor = 0.6;    // fraction
  double t_wall_left = 24.0;
  double t_wall_right = 24.0;

  bool operator==(const ContinuousState&) const = default;
};

struct ExogenousSample {
  double t_outdoor = 28.0;   // degC
  double rh_outdoor = 0.7;   // fraction
  double occupants = 0.0;
  double solar_wall = 0.0;   // W/m2 on the right wall
  double price = 0.0;        // currency/kWh
};

struct ControlInput {
  double g_fau = 0.0;  // kg/s
  double t_fau = 15.0; // degC
  double g_fcu = 0.0;  // kg/s
  double t_fcu = 15.0; // degC

  bool operator==(const ControlInput&) const = default;
};

/// Electrical-side quantities in kW; cooling terms are thermal load on the chiller.
struct PowerBreakdown {
  double cooling_fcu = 0.0;
  double cooling_fau = 0.0;
  double fan_fcu = 0.0;
  double fan_fau = 0.0;

  double electrical(double eta) const { return eta * (cooling_fcu + cooling_fau) + fan_fcu + fan_fau; }
};

namespace detail {

inline bool all_finite(const ContinuousState& s) {
  return std::isfinite(s.t_indoor) && std::isfinite(s.rh_indoor) && std::isfinite(s.t_wall_left) &&
         std::isfinite(s.t_wall_right);
}

/// Humidity ratio of FAU supply air: outdoor air, capped by the coil's saturation point.
inline double fau_supply_ratio(const HvacParams& hvac, const ExogenousSample& exo, const ControlInput& u) {
  const double w_out = psychro::humidity_ratio(exo.t_outdoor, exo.rh_outdoor);
  const double w_cap = psychro::humidity_ratio(u.t_fau, hvac.fau_supply_saturation);
  return std::min(w_out, w_cap);
}

/// FCU supply air leaves the coil dehumidified only if the return air is wetter than saturation at coil temperature.
inline double fcu_supply_ratio(double w_return, const ControlInput& u) {
  return std::min(w_return, psychro::saturation_humidity_ratio(u.t_fcu));
}

}  // namespace detail

/// One forward-difference step of the room air, wall and moisture balances.
inline ContinuousState step_dynamics(const Building& b, const ContinuousState& s, const ExogenousSample& exo,
                                     const ControlInput& u, double dt) {
  if (!(dt > 0.0)) throw NumericError("step_dynamics: dt must be positive");
  const RoomParams& r = b.room;
  const double occupants = exo.occupants;

  const double q_air = occupants * r.q_occupant + occupants * b.hvac.device_heat_per_occupant +
                       r.h_glass * r.a_glass * (exo.t_outdoor - s.t_indoor) +
                       r.h_wall * r.a_wall_left * (s.t_wall_left - s.t_indoor) +
                       r.h_wall * r.a_wall_right * (s.t_wall_right - s.t_indoor) +
                       r.cp_air * u.g_fau * (u.t_fau - s.t_indoor) +
                       r.cp_air * u.g_fcu * (u.t_fcu - s.t_indoor);

  const double q_left = r.h_wall * r.a_wall_left * (s.t_indoor - s.t_wall_left);
  const double q_right =
      r.h_wall * r.a_wall_right * (s.t_indoor - s.t_wall_right) + r.alpha_wall * r.a_wall_right * exo.solar_wall;

  const double w_air = psychro::humidity_ratio(s.t_indoor, s.rh_indoor);
  const double w_fau = detail::fau_supply_ratio(b.hvac, exo, u);
  const double w_fcu = detail::fcu_supply_ratio(w_air, u);
  const double moisture = occupants * r.h_gen + u.g_fau * (w_fau - w_air) + u.g_fcu * (w_fcu - w_air);

  ContinuousState next;
  next.t_indoor = s.t_indoor + q_air * dt / (r.cp_air * r.m_air);
  next.t_wall_left = s.t_wall_left + q_left * dt / (r.c_wall * r.m_wall_left);
  next.t_wall_right = s.t_wall_right + q_right * dt / (r.c_wall * r.m_wall_right);
  const double w_next = std::max(0.0, w_air + moisture * dt / r.m_air);
  // Supersaturated air condenses back to RH = 1.
  next.rh_indoor = std::clamp(psychro::relative_humidity(next.t_indoor, w_next), 0.0, 1.0);

  if (!detail::all_finite(next)) throw NumericError("step_dynamics produced a non-finite state");
  return next;
}

inline double fan_power(double rated_power, double flow, double rated_flow) {
  const double ratio = flow / rated_flow;
  return rated_power * ratio * ratio * ratio;
}

/// Chiller load and fan power of both air handlers. Cooling mode only: negative loads clamp to 0.
inline PowerBreakdown hvac_power(const Building& b, const ContinuousState& s, const ExogenousSample& exo,
                                 const ControlInput& u) {
  const double cp_kj = b.room.cp_air / 1000.0;  // kJ/(kg K)

  const double w_air = psychro::humidity_ratio(s.t_indoor, s.rh_indoor);
  const double w_fcu = detail::fcu_supply_ratio(w_air, u);
  const double fcu_sensible = cp_kj * u.g_fcu * (s.t_indoor - u.t_fcu);
  const double fcu_latent =
      u.g_fcu * (psychro::latent_enthalpy(s.t_indoor, w_air) - psychro::latent_enthalpy(u.t_fcu, w_fcu));

  const double w_out = psychro::humidity_ratio(exo.t_outdoor, exo.rh_outdoor);
  const double w_fau = detail::fau_supply_ratio(b.hvac, exo, u);
  const double fau_sensible = cp_kj * u.g_fau * (exo.t_outdoor - u.t_fau);
  const double fau_latent =
      u.g_fau * (psychro::latent_enthalpy(exo.t_outdoor, w_out) - psychro::latent_enthalpy(u.t_fau, w_fau));

  PowerBreakdown p;
  p.cooling_fcu = std::max(0.0, fcu_sensible + fcu_latent);
  p.cooling_fau = std::max(0.0, fau_sensible + fau_latent);
  p.fan_fcu = fan_power(b.hvac.fcu_rated_fan_power, u.g_fcu, b.hvac.fcu_rated_flow);
  p.fan_fau = fan_power(b.hvac.fau_rated_fan_power, u.g_fau, b.hvac.fau_rated_flow);
  return p;
}

/// Energy cost of running `power` for `dt` seconds at `price` per kWh.
inline double energy_cost(const PowerBreakdown& power, double eta, double price, double dt) {
  return price * power.electrical(eta) * dt / 3600.0;
}

/// Stage cost in currency. `penalty` is added when the caller flags a comfort violation.
inline double stage_cost(const Building& b, const ContinuousState& s, const ExogenousSample& exo,
                         const ControlInput& u, double dt, std::optional<double> penalty = std::nullopt) {
  if (!(dt > 0.0)) throw NumericError("stage_cost: dt must be positive");
  return energy_cost(hvac_power(b, s, exo, u), b.hvac.eta, exo.price, dt) + penalty.value_or(0.0);
}

inline bool within_bounds(const HvacParams& h, const ControlInput& u) {
  return h.fau_flow.contains(u.g_fau) && h.fcu_flow.contains(u.g_fcu) && h.fau_temp.contains(u.t_fau) &&
         h.fcu_temp.contains(u.t_fcu);
}

}  // namespace hvacmdp
