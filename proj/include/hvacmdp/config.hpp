#pragma once

// Experiment configuration: Case presets, a sectioned key=value file on top of them, and the
// pipeline from weather data to a ready HvacMdp.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hvacmdp/error.hpp"
#include "hvacmdp/gbpi.hpp"
#include "hvacmdp/hvac_mdp.hpp"
#include "hvacmdp/markov.hpp"
#include "hvacmdp/oracle.hpp"
#include "hvacmdp/spaces.hpp"
#include "hvacmdp/weather.hpp"

namespace hvacmdp {

struct GridConfig {
  double temp_step = 2.0;  // degC, indoor and outdoor
  double rh_step = 0.10;   // fraction, indoor and outdoor
  Bounds t_out{22.0, 34.0};
  Bounds rh_out{0.40, 1.00};
  Bounds t_in{18.0, 30.0};
  Bounds rh_in{0.30, 0.90};
  double max_occupants = 5.0;
  std::size_t occupancy_levels = 5;
  bool windows = true;            // per-stage outdoor windows fitted on the weather days
  std::size_t window_margin = 1;  // levels added on each side of the observed range
};

struct ActionConfig {
  std::vector<double> fau_temps{15.0};
  std::vector<double> fcu_temps{15.0};
  std::size_t fau_flow_levels = 5;
  std::size_t fcu_flow_levels = 5;
};

struct OccupancyConfig {
  double persistence = 0.6;
  double peak_share = 0.8;
};

struct WeatherConfig {
  std::string csv;  // empty: synthetic days
  std::size_t days = 60;
  SyntheticWeatherProfile profile;
};

struct EvaluationConfig {
  std::size_t scenarios = 100;
  std::size_t histogram_bins = 20;
};

struct ExperimentConfig {
  int case_id = 2;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  HvacModel model;
  GridConfig grids;
  ActionConfig actions;
  OccupancyConfig occupancy;
  InitBands bands;
  ContinuousState initial{24.0, 0.60, 24.0, 24.0};
  WeatherConfig weather;
  GbpiConfig gbpi;
  RolloutMode learning_mode = RolloutMode::Regenerate;
  EvaluationConfig evaluation;
  PerfectInfoOptions oracle;

  // Seeds of the independent random streams, all derived from `seed`.
  std::uint64_t weather_seed() const { return derive_seed(seed, 0x77ea); }
  std::uint64_t learn_seed() const { return derive_seed(seed, 0x1ea7); }
  std::uint64_t trace_seed() const { return derive_seed(seed, 0x77ace); }
  std::uint64_t eval_seed() const { return derive_seed(seed, 0xe7a1); }
};

/// Case I: 2 degC / 10 % grids, supply temperatures {12,14,16}, 3 flow levels, 1000 paths.
/// Case II: same grids, supply fixed at 15 degC, 5 flow levels, 2000 paths.
/// Case III: 1 degC / 5 % grids, Case II actions, 5000 paths.
inline ExperimentConfig case_preset(int id) {
  ExperimentConfig c;
  c.case_id = id;
  c.gbpi.epsilon = 1e-4;
  c.gbpi.max_iterations = 20;
  c.gbpi.min_visits = 10;
  c.gbpi.cost_scale = 1e4;
  c.gbpi.max_decrease = 0.5;
  switch (id) {
    case 1:
      c.actions.fau_temps = c.actions.fcu_temps = {12.0, 14.0, 16.0};
      c.actions.fau_flow_levels = c.actions.fcu_flow_levels = 3;
      c.gbpi.n_paths = 1000;
      break;
    case 2:
      c.gbpi.n_paths = 2000;
      break;
    case 3:
      c.grids.temp_step = 1.0;
      c.grids.rh_step = 0.05;
      c.gbpi.n_paths = 5000;
      break;
    default:
      throw ConfigError("case must be 1, 2 or 3");
  }
  return c;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline double config_double(const std::string& key, const std::string& text) {
  const std::string_view s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

inline std::uint64_t config_uint(const std::string& key, const std::string& text) {
  const std::string_view s = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  return v;
}

inline bool config_bool(const std::string& key, const std::string& text) {
  const std::string_view s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

inline std::vector<double> config_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(config_double(key, item));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + format_double(x);
  return out;
}

inline std::string mode_name(RolloutMode m) {
  switch (m) {
    case RolloutMode::Deploy: return "deploy";
    case RolloutMode::Regenerate: return "regenerate";
    case RolloutMode::Penalize: return "penalize";
  }
  return "regenerate";
}

struct ConfigKey {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

// "section.key" -> accessor. Everything a config file may set, in file order.
inline const std::vector<std::pair<std::string, ConfigKey>>& config_keys() {
  static const std::vector<std::pair<std::string, ConfigKey>> keys = [] {
    std::vector<std::pair<std::string, ConfigKey>> k;
    auto real = [&k](std::string name, auto member) {
      k.push_back({name, {[member](const ExperimentConfig& c) { return format_double(member(c)); },
                          [member, name](ExperimentConfig& c, const std::string& v) { member(c) = config_double(name, v); }}});
    };
    auto count = [&k](std::string name, auto member) {
      k.push_back({name, {[member](const ExperimentConfig& c) { return std::to_string(member(c)); },
                          [member, name](ExperimentConfig& c, const std::string& v) {
                            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(config_uint(name, v));
                          }}});
    };
    auto flag = [&k](std::string name, auto member) {
      k.push_back({name, {[member](const ExperimentConfig& c) {
                            return std::string(member(c) ? "true" : "false");
                          },
                          [member, name](ExperimentConfig& c, const std::string& v) { member(c) = config_bool(name, v); }}});
    };
    auto list = [&k](std::string name, auto member) {
      k.push_back({name, {[member](const ExperimentConfig& c) { return format_list(member(c)); },
                          [member, name](ExperimentConfig& c, const std::string& v) { member(c) = config_list(name, v); }}});
    };
    auto text = [&k](std::string name, auto member) {
      k.push_back({name, {[member](const ExperimentConfig& c) { return member(c); },
                          [member](ExperimentConfig& c, const std::string& v) { member(c) = std::string(trim(v)); }}});
    };
#define HV_FIELD(expr) [](auto& c) -> auto& { return expr; }
    // case is handled before everything else; listed here so dumps carry it
    k.push_back({"experiment.case", {[](const ExperimentConfig& c) { return std::to_string(c.case_id); },
                                     [](ExperimentConfig&, const std::string&) {}}});
    count("experiment.seed", HV_FIELD(c.seed));
    count("experiment.stages", HV_FIELD(c.model.stages));
    real("experiment.dt", HV_FIELD(c.model.dt));
    k.push_back({"experiment.price", {[](const ExperimentConfig& c) { return c.model.price.to_string(); },
                                      [](ExperimentConfig& c, const std::string& v) {
                                        c.model.price = PriceSchedule::parse(trim(v));
                                      }}});
    real("experiment.penalty", HV_FIELD(c.model.penalty));
    text("experiment.out_dir", HV_FIELD(c.out_dir));
    count("experiment.workers", HV_FIELD(c.gbpi.workers));

    real("room.cp_air", HV_FIELD(c.model.building.room.cp_air));
    real("room.m_air", HV_FIELD(c.model.building.room.m_air));
    real("room.m_wall_left", HV_FIELD(c.model.building.room.m_wall_left));
    real("room.m_wall_right", HV_FIELD(c.model.building.room.m_wall_right));
    real("room.c_wall", HV_FIELD(c.model.building.room.c_wall));
    real("room.h_glass", HV_FIELD(c.model.building.room.h_glass));
    real("room.a_glass", HV_FIELD(c.model.building.room.a_glass));
    real("room.h_wall", HV_FIELD(c.model.building.room.h_wall));
    real("room.a_wall_left", HV_FIELD(c.model.building.room.a_wall_left));
    real("room.a_wall_right", HV_FIELD(c.model.building.room.a_wall_right));
    real("room.alpha_wall", HV_FIELD(c.model.building.room.alpha_wall));
    real("room.q_occupant", HV_FIELD(c.model.building.room.q_occupant));
    real("room.h_gen", HV_FIELD(c.model.building.room.h_gen));

    real("hvac.fau_flow_min", HV_FIELD(c.model.building.hvac.fau_flow.lo));
    real("hvac.fau_flow_max", HV_FIELD(c.model.building.hvac.fau_flow.hi));
    real("hvac.fcu_flow_min", HV_FIELD(c.model.building.hvac.fcu_flow.lo));
    real("hvac.fcu_flow_max", HV_FIELD(c.model.building.hvac.fcu_flow.hi));
    real("hvac.fau_temp_min", HV_FIELD(c.model.building.hvac.fau_temp.lo));
    real("hvac.fau_temp_max", HV_FIELD(c.model.building.hvac.fau_temp.hi));
    real("hvac.fcu_temp_min", HV_FIELD(c.model.building.hvac.fcu_temp.lo));
    real("hvac.fcu_temp_max", HV_FIELD(c.model.building.hvac.fcu_temp.hi));
    real("hvac.fau_rated_flow", HV_FIELD(c.model.building.hvac.fau_rated_flow));
    real("hvac.fcu_rated_flow", HV_FIELD(c.model.building.hvac.fcu_rated_flow));
    real("hvac.fau_rated_fan_power", HV_FIELD(c.model.building.hvac.fau_rated_fan_power));
    real("hvac.fcu_rated_fan_power", HV_FIELD(c.model.building.hvac.fcu_rated_fan_power));
    real("hvac.eta", HV_FIELD(c.model.building.hvac.eta));
    real("hvac.fau_supply_saturation", HV_FIELD(c.model.building.hvac.fau_supply_saturation));
    real("hvac.device_heat", HV_FIELD(c.model.building.hvac.device_heat_per_occupant));

    real("comfort.metabolic_rate", HV_FIELD(c.model.comfort.metabolic_rate));
    real("comfort.mechanical_work", HV_FIELD(c.model.comfort.mechanical_work));
    real("comfort.air_velocity", HV_FIELD(c.model.comfort.air_velocity));
    real("comfort.clothing", HV_FIELD(c.model.comfort.clothing_insulation));
    real("comfort.radiant_offset", HV_FIELD(c.model.comfort.radiant_offset));
    real("comfort.pmv_low", HV_FIELD(c.model.comfort.band.pmv_low));
    real("comfort.pmv_high", HV_FIELD(c.model.comfort.band.pmv_high));

    real("grids.temp_step", HV_FIELD(c.grids.temp_step));
    real("grids.rh_step", HV_FIELD(c.grids.rh_step));
    real("grids.t_out_min", HV_FIELD(c.grids.t_out.lo));
    real("grids.t_out_max", HV_FIELD(c.grids.t_out.hi));
    real("grids.rh_out_min", HV_FIELD(c.grids.rh_out.lo));
    real("grids.rh_out_max", HV_FIELD(c.grids.rh_out.hi));
    real("grids.t_in_min", HV_FIELD(c.grids.t_in.lo));
    real("grids.t_in_max", HV_FIELD(c.grids.t_in.hi));
    real("grids.rh_in_min", HV_FIELD(c.grids.rh_in.lo));
    real("grids.rh_in_max", HV_FIELD(c.grids.rh_in.hi));
    real("grids.max_occupants", HV_FIELD(c.grids.max_occupants));
    count("grids.occupancy_levels", HV_FIELD(c.grids.occupancy_levels));
    flag("grids.windows", HV_FIELD(c.grids.windows));
    count("grids.window_margin", HV_FIELD(c.grids.window_margin));

    list("actions.fau_temps", HV_FIELD(c.actions.fau_temps));
    list("actions.fcu_temps", HV_FIELD(c.actions.fcu_temps));
    count("actions.fau_flow_levels", HV_FIELD(c.actions.fau_flow_levels));
    count("actions.fcu_flow_levels", HV_FIELD(c.actions.fcu_flow_levels));

    real("occupancy.persistence", HV_FIELD(c.occupancy.persistence));
    real("occupancy.peak_share", HV_FIELD(c.occupancy.peak_share));

    flag("init.bands", HV_FIELD(c.bands.enabled));
    real("init.temp_min", HV_FIELD(c.bands.temp.lo));
    real("init.temp_max", HV_FIELD(c.bands.temp.hi));
    real("init.rh_min", HV_FIELD(c.bands.rh.lo));
    real("init.rh_max", HV_FIELD(c.bands.rh.hi));
    real("init.t_indoor", HV_FIELD(c.initial.t_indoor));
    real("init.rh_indoor", HV_FIELD(c.initial.rh_indoor));
    real("init.t_wall_left", HV_FIELD(c.initial.t_wall_left));
    real("init.t_wall_right", HV_FIELD(c.initial.t_wall_right));

    text("weather.csv", HV_FIELD(c.weather.csv));
    count("weather.days", HV_FIELD(c.weather.days));
    real("weather.temp_center", HV_FIELD(c.weather.profile.temp_center));
    real("weather.temp_amplitude", HV_FIELD(c.weather.profile.temp_amplitude));
    real("weather.rh_center", HV_FIELD(c.weather.profile.rh_center));
    real("weather.rh_amplitude", HV_FIELD(c.weather.profile.rh_amplitude));
    real("weather.peak_hour", HV_FIELD(c.weather.profile.peak_hour));
    real("weather.day_offset_sd", HV_FIELD(c.weather.profile.day_offset_sd));
    real("weather.noise_sd", HV_FIELD(c.weather.profile.noise_sd));
    real("weather.rh_noise_sd", HV_FIELD(c.weather.profile.rh_noise_sd));
    real("weather.solar_peak", HV_FIELD(c.weather.profile.solar_peak));

    count("gbpi.paths", HV_FIELD(c.gbpi.n_paths));
    real("gbpi.epsilon", HV_FIELD(c.gbpi.epsilon));
    count("gbpi.max_iterations", HV_FIELD(c.gbpi.max_iterations));
    count("gbpi.min_visits", HV_FIELD(c.gbpi.min_visits));
    real("gbpi.cost_scale", HV_FIELD(c.gbpi.cost_scale));
    real("gbpi.max_decrease", HV_FIELD(c.gbpi.max_decrease));
    count("gbpi.wave_size", HV_FIELD(c.gbpi.wave_size));
    k.push_back({"gbpi.learning_mode", {[](const ExperimentConfig& c) { return mode_name(c.learning_mode); },
                                        [](ExperimentConfig& c, const std::string& v) {
                                          const std::string_view s = trim(v);
                                          if (s == "regenerate") c.learning_mode = RolloutMode::Regenerate;
                                          else if (s == "penalize") c.learning_mode = RolloutMode::Penalize;
                                          else throw ConfigError("gbpi.learning_mode must be regenerate or penalize");
                                        }}});

    count("evaluation.scenarios", HV_FIELD(c.evaluation.scenarios));
    count("evaluation.histogram_bins", HV_FIELD(c.evaluation.histogram_bins));

    real("oracle.temp_resolution", HV_FIELD(c.oracle.temp_resolution));
    real("oracle.rh_resolution", HV_FIELD(c.oracle.rh_resolution));
#undef HV_FIELD
    return k;
  }();
  return keys;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  if (c.model.stages < 2) throw ConfigError("experiment.stages must be at least 2");
  if (!(c.model.dt > 0.0)) throw ConfigError("experiment.dt must be positive");
  if (c.model.penalty < 0.0) throw ConfigError("experiment.penalty must be non-negative");
  c.model.building.room.validate();
  c.model.building.hvac.validate();
  if (!(c.model.comfort.band.pmv_low < c.model.comfort.band.pmv_high)) throw ConfigError("comfort band is empty");
  if (!(c.grids.temp_step > 0.0 && c.grids.rh_step > 0.0)) throw ConfigError("grid steps must be positive");
  for (const Bounds* b : {&c.grids.t_out, &c.grids.rh_out, &c.grids.t_in, &c.grids.rh_in})
    if (!(b->lo <= b->hi)) throw ConfigError("grid ranges must satisfy min <= max");
  if (c.grids.rh_in.lo < 0.0 || c.grids.rh_in.hi > 1.0 || c.grids.rh_out.lo < 0.0 || c.grids.rh_out.hi > 1.0)
    throw ConfigError("RH grids must lie in [0,1]");
  if (c.grids.occupancy_levels == 0 || c.grids.max_occupants < 0.0) throw ConfigError("bad occupancy grid");
  if (c.actions.fau_flow_levels == 0 || c.actions.fcu_flow_levels == 0) throw ConfigError("flow levels must be >= 1");
  if (!(c.occupancy.persistence >= 0.0 && c.occupancy.persistence <= 1.0 && c.occupancy.peak_share >= 0.0 &&
        c.occupancy.peak_share <= 1.0))
    throw ConfigError("occupancy persistence and peak_share must lie in [0,1]");
  if (!(c.initial.rh_indoor >= 0.0 && c.initial.rh_indoor <= 1.0)) throw ConfigError("init.rh_indoor must lie in [0,1]");
  if (c.weather.csv.empty() && c.weather.days == 0) throw ConfigError("weather.days must be positive");
  if (c.evaluation.scenarios == 0) throw ConfigError("evaluation.scenarios must be positive");
  if (c.evaluation.histogram_bins == 0) throw ConfigError("evaluation.histogram_bins must be positive");
  c.gbpi.validate();
}

/// Parses a config file over the preset named by its `experiment.case` (or `case_override`,
/// which wins). Unknown sections and keys are rejected.
inline ExperimentConfig parse_config(std::istream& in, std::optional<int> case_override = std::nullopt) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  int id = 2;
  if (const auto exp = tree.get_child_optional("experiment"))
    if (const auto v = exp->get_optional<std::string>("case"))
      id = static_cast<int>(detail::config_uint("experiment.case", *v));
  if (case_override) id = *case_override;
  ExperimentConfig cfg = case_preset(id);

  std::map<std::string, const detail::ConfigKey*> index;
  for (const auto& [name, key] : detail::config_keys()) index.emplace(name, &key);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto it = index.find(name);
      if (it == index.end()) throw ConfigError("unknown config key '" + name + "'");
      it->second->set(cfg, value.data());
    }
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path, std::optional<int> case_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, case_override);
}

/// Full dump in the config format; parse_config(dump) reproduces `cfg`.
inline std::string dump_config(const ExperimentConfig& cfg) {
  std::string out, section;
  for (const auto& [name, key] : detail::config_keys()) {
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      out += (out.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    out += name.substr(dot + 1) + " = " + key.get(cfg) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// From configuration and weather to an environment.

inline StateGrids make_state_grids(const GridConfig& g) {
  return {LevelGrid::covering(g.t_out.lo, g.t_out.hi, g.temp_step), LevelGrid::covering(g.rh_out.lo, g.rh_out.hi, g.rh_step),
          LevelGrid::covering(g.t_in.lo, g.t_in.hi, g.temp_step), LevelGrid::covering(g.rh_in.lo, g.rh_in.hi, g.rh_step),
          LevelGrid::spread(0.0, g.max_occupants, g.occupancy_levels)};
}

inline ActionLevels make_action_levels(const ActionConfig& a, const HvacParams& h) {
  auto flows = [](const Bounds& b, std::size_t n) {
    const LevelGrid g = LevelGrid::spread(b.lo, b.hi, n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = g.value(i);
    return v;
  };
  return {flows(h.fau_flow, a.fau_flow_levels), a.fau_temps, flows(h.fcu_flow, a.fcu_flow_levels), a.fcu_temps};
}

/// Everything the learner takes from weather data: chains, Strategy-I windows and the mean solar profile.
struct ExogenousModel {
  MarkovChainSet chains;
  std::vector<LevelWindow> temp_windows;
  std::vector<LevelWindow> humid_windows;
  std::vector<double> solar;  // W/m2 per stage
};

inline WeatherSeries load_weather(const ExperimentConfig& cfg) {
  if (cfg.weather.csv.empty()) return synth_weather(cfg.weather.profile, cfg.weather.days, cfg.weather_seed());
  std::ifstream in(cfg.weather.csv);
  if (!in) throw DataError("cannot open weather file '" + cfg.weather.csv + "'");
  return read_weather_csv(in);
}

inline ExogenousModel fit_exogenous(const ExperimentConfig& cfg, const std::vector<DayProfile>& days) {
  if (days.empty()) throw EmptyData("no complete weather days");
  const StateGrids grids = make_state_grids(cfg.grids);
  ExogenousModel m;
  m.chains = estimate_chains(days, {}, grids.t_out, grids.rh_out, grids.occ, cfg.model.stages, cfg.model.dt);
  m.chains.occ = default_occupancy_chain(cfg.model.stages, cfg.model.dt, grids.occ.size(), cfg.occupancy.persistence,
                                         cfg.occupancy.peak_share);
  StateSpace ss(grids, cfg.model.stages);
  if (cfg.grids.windows) ss.fit_windows(days, cfg.grids.window_margin);
  for (std::size_t t = 0; t < cfg.model.stages; ++t) {
    m.temp_windows.push_back(ss.temp_window(t));
    m.humid_windows.push_back(ss.humid_window(t));
  }
  m.solar.assign(cfg.model.stages, 0.0);
  std::size_t with_solar = 0;
  for (const auto& d : days) {
    if (d.solar_wm2.size() != cfg.model.stages) continue;
    ++with_solar;
    for (std::size_t t = 0; t < cfg.model.stages; ++t) m.solar[t] += d.solar_wm2[t];
  }
  if (with_solar > 0)
    for (double& s : m.solar) s /= static_cast<double>(with_solar);
  else
    for (std::size_t t = 0; t < cfg.model.stages; ++t)
      m.solar[t] = synthetic_solar(cfg.weather.profile, std::fmod(static_cast<double>(t) * cfg.model.dt / 3600.0, 24.0));
  return m;
}

inline ExogenousModel fit_exogenous(const ExperimentConfig& cfg) {
  return fit_exogenous(cfg, resample_days(load_weather(cfg), cfg.model.stages, cfg.model.dt));
}

/// Environment for `cfg`. The initial exogenous levels are the midpoints of the stage-0 windows with
/// occupancy level 0. Returned by pointer because policies built from it refer back to it.
inline std::unique_ptr<HvacMdp> build_environment(const ExperimentConfig& cfg, const ExogenousModel& exo) {
  validate(cfg);
  const StateGrids grids = make_state_grids(cfg.grids);
  if (!(exo.chains.temp_grid == grids.t_out && exo.chains.humid_grid == grids.rh_out && exo.chains.occ_grid == grids.occ))
    throw GridMismatch("chain grids differ from the configured grids");
  if (exo.temp_windows.size() != cfg.model.stages || exo.humid_windows.size() != cfg.model.stages)
    throw GridMismatch("window count differs from the stage count");
  StateSpace ss(grids, cfg.model.stages);
  for (std::size_t t = 0; t < cfg.model.stages; ++t) ss.set_window(t, exo.temp_windows[t], exo.humid_windows[t]);
  HvacModel model = cfg.model;
  model.solar = exo.solar;
  ActionSpace actions(make_action_levels(cfg.actions, model.building.hvac), model.building.hvac);
  const LevelWindow w = ss.temp_window(0), h = ss.humid_window(0);
  const ExoLevels e0{(w.lo + w.hi) / 2, (h.lo + h.hi) / 2, 0};
  auto env = std::make_unique<HvacMdp>(std::move(model), std::move(ss), std::move(actions), exo.chains, e0, cfg.initial,
                                       cfg.bands);
  env->set_learning_mode(cfg.learning_mode);
  return env;
}

}  // namespace hvacmdp
