#pragma once

#include <algorithm>
#include <cmath>

namespace hvacmdp::psychro {

inline constexpr double kStandardPressure = 1.01e5;  // Pa
inline constexpr double kWaterAirMassRatio = 0.621945;

/// Saturation vapour pressure over water [Pa], Magnus form (Alduchov-Eskridge coefficients).
inline double saturation_pressure(double t_celsius) {
  return 610.94 * std::exp(17.625 * t_celsius / (t_celsius + 243.04));
}

inline double vapour_pressure(double t_celsius, double rh) { return rh * saturation_pressure(t_celsius); }

/// Humidity ratio [kg water / kg dry air] from temperature and relative humidity (fraction).
inline double humidity_ratio(double t_celsius, double rh, double pressure = kStandardPressure) {
  const double pv = vapour_pressure(t_celsius, rh);
  return kWaterAirMassRatio * pv / (pressure - pv);
}

inline double saturation_humidity_ratio(double t_celsius, double pressure = kStandardPressure) {
  return humidity_ratio(t_celsius, 1.0, pressure);
}

/// Relative humidity (fraction, not clamped) for a humidity ratio at the given temperature.
inline double relative_humidity(double t_celsius, double w, double pressure = kStandardPressure) {
  const double pv = w * pressure / (kWaterAirMassRatio + w);
  return pv / saturation_pressure(t_celsius);
}

/// Moist-air enthalpy above the dry-air part [kJ/kg]: w * (2500 + 1.84 T).
inline double latent_enthalpy(double t_celsius, double w) { return w * (2500.0 + 1.84 * t_celsius); }

}  // namespace hvacmdp::psychro
