#pragma once

// Fanger predicted mean vote. The clothing surface temperature is found by a damped
// fixed-point iteration; the heat-loss terms follow the usual ISO 7730 layout.

#include <algorithm>
#include <cmath>
#include <string>

#include "hvacmdp/error.hpp"
#include "hvacmdp/psychro.hpp"

namespace hvacmdp {

inline constexpr double kMetToWattsPerM2 = 58.15;
inline constexpr double kCloToM2KPerW = 0.155;

struct PmvInputs {
  double metabolic_rate = 1.0;    // met
  double mechanical_work = 0.0;   // W/m2
  double t_air = 25.0;            // degC
  double rh = 0.5;                // fraction
  double t_radiant = 27.0;        // degC
  double air_velocity = 0.2;      // m/s
  double clothing_insulation = 1.0;  // clo
  double pressure = psychro::kStandardPressure;  // Pa; kept for psychrometric callers, not used by the heat balance
};

struct ComfortBand {
  double pmv_low = -0.5;
  double pmv_high = 0.5;
};

inline bool is_comfortable(double pmv, const ComfortBand& band) {
  return pmv >= band.pmv_low && pmv <= band.pmv_high;
}

inline double mean_radiant_temp(double t_air) { return t_air + 2.0; }

struct PmvSolverOptions {
  double damping = 0.5;
  double tolerance = 1e-5;  // degC on the clothing surface temperature
  int max_iterations = 150;
};

inline bool pmv_domain_ok(const PmvInputs& in) {
  return in.t_air >= 10.0 && in.t_air <= 40.0 && in.metabolic_rate > 0.0 && in.air_velocity >= 0.0 &&
         in.rh >= 0.0 && in.rh <= 1.0 && in.clothing_insulation >= 0.0 && std::isfinite(in.t_radiant);
}

inline double compute_pmv(const PmvInputs& in, const PmvSolverOptions& opt = {}) {
  if (!pmv_domain_ok(in)) throw NumericError("compute_pmv: inputs outside the supported range");

  const double m = in.metabolic_rate * kMetToWattsPerM2;
  const double mw = m - in.mechanical_work;
  const double pa = psychro::vapour_pressure(in.t_air, in.rh);  // Pa
  const double icl = in.clothing_insulation * kCloToM2KPerW;
  const double fcl = icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hc_forced = 12.1 * std::sqrt(in.air_velocity);
  const double tr4 = std::pow((in.t_radiant + 273.0) / 100.0, 4);

  // Clothing surface balance: tcl = 35.7 - 0.028 mw - icl * (radiation + convection).
  const double t_skin_core = 35.7 - 0.028 * mw;
  auto convective = [&](double tcl) {
    return std::max(hc_forced, 2.38 * std::pow(std::abs(tcl - in.t_air), 0.25));
  };
  auto surface_map = [&](double tcl) {
    const double rad = 3.96e-8 * fcl * (std::pow(tcl + 273.0, 4) - tr4 * 1e8);
    const double conv = fcl * convective(tcl) * (tcl - in.t_air);
    return t_skin_core - icl * (rad + conv);
  };

  double tcl = in.t_air + (35.5 - in.t_air) / (3.5 * icl + 0.1);
  bool converged = false;
  for (int i = 0; i < opt.max_iterations; ++i) {
    const double mapped = surface_map(tcl);
    if (std::abs(mapped - tcl) < opt.tolerance) {
      tcl = mapped;
      converged = true;
      break;
    }
    tcl = (1.0 - opt.damping) * mapped + opt.damping * tcl;
  }
  if (!converged) throw NonConvergence("PMV clothing temperature iteration");

  const double hc = convective(tcl);
  const double skin_diffusion = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
  const double sweat = mw > kMetToWattsPerM2 ? 0.42 * (mw - kMetToWattsPerM2) : 0.0;
  const double latent_resp = 1.7e-5 * m * (5867.0 - pa);
  const double dry_resp = 0.0014 * m * (34.0 - in.t_air);
  const double radiation = 3.96e-8 * fcl * (std::pow(tcl + 273.0, 4) - tr4 * 1e8);
  const double convection = fcl * hc * (tcl - in.t_air);
  const double sensitivity = 0.303 * std::exp(-0.036 * m) + 0.028;
  const double pmv =
      sensitivity * (mw - skin_diffusion - sweat - latent_resp - dry_resp - radiation - convection);
  return std::clamp(pmv, -3.5, 3.5);
}

/// Static (non-state) inputs of the comfort evaluation used by the controller.
struct ComfortSettings {
  double metabolic_rate = 1.0;
  double mechanical_work = 0.0;
  double air_velocity = 0.2;
  double clothing_insulation = 1.0;  // clo
  double radiant_offset = 2.0;       // mean radiant = air + offset
  ComfortBand band;
};

inline PmvInputs pmv_inputs(const ComfortSettings& c, double t_air, double rh) {
  PmvInputs in;
  in.metabolic_rate = c.metabolic_rate;
  in.mechanical_work = c.mechanical_work;
  in.t_air = t_air;
  in.rh = rh;
  in.t_radiant = t_air + c.radiant_offset;
  in.air_velocity = c.air_velocity;
  in.clothing_insulation = c.clothing_insulation;
  return in;
}

struct ComfortCheck {
  double pmv = 0.0;
  bool comfortable = false;
};

/// PMV of an indoor condition; air temperatures outside the PMV domain count as uncomfortable.
inline ComfortCheck check_comfort(const ComfortSettings& c, double t_air, double rh) {
  const PmvInputs in = pmv_inputs(c, t_air, rh);
  if (!pmv_domain_ok(in)) return {t_air < 10.0 ? -3.5 : 3.5, false};
  const double pmv = compute_pmv(in);
  return {pmv, is_comfortable(pmv, c.band)};
}

}  // namespace hvacmdp
