#pragma once

// Persistence: policy tables, fitted exogenous models, iteration logs, evaluation and report CSVs.
//
// Policy file (text, one record per line):
//   hvacmdp-policy <version>
//   stages <T>
//   actions <A>
//   layout <canonical description of the state grids and action levels>
//   stage <t> <row count>
//   row <state> <k> <action>:<weight> ... (k nonzero entries; omitted actions are exactly 0)
//   end
// Rows appear in increasing state order; weights use the shortest round-trip decimal form.
//
// Exogenous model file: JSON with format "hvacmdp-exogenous", version, grids, windows, solar and
// one matrix list per chain.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvacmdp/config.hpp"
#include "hvacmdp/enumerated.hpp"
#include "hvacmdp/error.hpp"
#include "hvacmdp/gbpi.hpp"
#include "hvacmdp/hvac_mdp.hpp"
#include "hvacmdp/markov.hpp"
#include "hvacmdp/policy.hpp"
#include "hvacmdp/spaces.hpp"

namespace hvacmdp {

inline constexpr int kPolicyFormatVersion = 1;
inline constexpr int kExogenousFormatVersion = 1;

namespace detail {

inline std::string grid_text(const LevelGrid& g) {
  return format_double(g.lo()) + ":" + format_double(g.step()) + ":" + std::to_string(g.size());
}

template <class T>
T parse_field(std::string_view s, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw CorruptFile(std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > j) out.push_back(line.substr(j, i - j));
  }
  return out;
}

}  // namespace detail

/// Canonical layout line of an HVAC policy; two policies are interchangeable iff these match.
inline std::string policy_layout(const StateSpace& states, const ActionSpace& actions) {
  const StateGrids& g = states.grids();
  const ActionLevels& a = actions.levels();
  return "t_out=" + detail::grid_text(g.t_out) + ";rh_out=" + detail::grid_text(g.rh_out) +
         ";t_in=" + detail::grid_text(g.t_in) + ";rh_in=" + detail::grid_text(g.rh_in) +
         ";occ=" + detail::grid_text(g.occ) + ";g_fau=" + detail::format_list(a.g_fau) +
         ";t_fau=" + detail::format_list(a.t_fau) + ";g_fcu=" + detail::format_list(a.g_fcu) +
         ";t_fcu=" + detail::format_list(a.t_fcu);
}

inline std::string policy_layout(const HvacMdp& env) { return policy_layout(env.states(), env.actions()); }

inline std::string policy_layout(const EnumeratedMdp& m) {
  return "enumerated;states=" + std::to_string(m.n_states) + ";actions=" + std::to_string(m.n_actions);
}

inline void write_policy(std::ostream& out, const StochasticPolicy& policy, const std::string& layout) {
  if (layout.find('\n') != std::string::npos) throw ConfigError("policy layout must be a single line");
  out << "hvacmdp-policy " << kPolicyFormatVersion << "\n";
  out << "stages " << policy.stages() << "\n";
  out << "actions " << policy.num_actions() << "\n";
  out << "layout " << layout << "\n";
  for (std::size_t t = 0; t < policy.stages(); ++t) {
    const auto& rows = policy.rows(t);
    out << "stage " << t << " " << rows.size() << "\n";
    for (const auto& [s, row] : rows) {
      const auto k = static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](double w) { return w != 0.0; }));
      out << "row " << s << " " << k;
      for (std::size_t a = 0; a < row.size(); ++a)
        if (row[a] != 0.0) out << " " << a << ":" << detail::format_double(row[a]);
      out << "\n";
    }
  }
  out << "end\n";
  if (!out) throw DataError("failed writing policy");
}

/// Reads a policy written by write_policy. A different format version, horizon, action count or
/// layout raises VersionMismatch; anything malformed or truncated raises CorruptFile. States
/// without a stored row fall back to `init`.
inline StochasticPolicy read_policy(std::istream& in, const std::string& expected_layout,
                                    StochasticPolicy::RowInit init = {}) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> std::vector<std::string_view> {
    if (!std::getline(in, line)) throw CorruptFile("policy file ends early (line " + std::to_string(lineno + 1) + ")");
    ++lineno;
    return detail::split_ws(line);
  };
  auto expect = [&](const std::vector<std::string_view>& f, std::string_view key, std::size_t n) {
    if (f.size() != n || f[0] != key)
      throw CorruptFile("policy line " + std::to_string(lineno) + ": expected '" + std::string(key) + "'");
  };

  auto f = next_line();
  if (f.size() != 2 || f[0] != "hvacmdp-policy") throw CorruptFile("not a policy file");
  const int version = detail::parse_field<int>(f[1], "version");
  if (version != kPolicyFormatVersion)
    throw VersionMismatch("policy format version " + std::to_string(version) + ", expected " +
                          std::to_string(kPolicyFormatVersion));
  f = next_line();
  expect(f, "stages", 2);
  const auto stages = detail::parse_field<std::size_t>(f[1], "stage count");
  f = next_line();
  expect(f, "actions", 2);
  const auto actions = detail::parse_field<std::size_t>(f[1], "action count");
  if (!std::getline(in, line)) throw CorruptFile("policy file ends before its layout");
  ++lineno;
  if (line.rfind("layout ", 0) != 0) throw CorruptFile("policy line " + std::to_string(lineno) + ": expected 'layout'");
  std::string layout = line.substr(7);
  while (!layout.empty() && layout.back() == '\r') layout.pop_back();
  if (layout != expected_layout) throw VersionMismatch("policy layout differs from the configured grids and actions");
  if (stages == 0 || actions == 0) throw CorruptFile("policy with no stages or actions");

  StochasticPolicy policy(stages, actions, std::move(init));
  for (std::size_t t = 0; t < stages; ++t) {
    f = next_line();
    expect(f, "stage", 3);
    if (detail::parse_field<std::size_t>(f[1], "stage") != t) throw CorruptFile("stages out of order");
    const auto nrows = detail::parse_field<std::size_t>(f[2], "row count");
    std::size_t prev = 0;
    for (std::size_t r = 0; r < nrows; ++r) {
      f = next_line();
      if (f.size() < 3 || f[0] != "row") throw CorruptFile("policy line " + std::to_string(lineno) + ": expected 'row'");
      const auto s = detail::parse_field<std::size_t>(f[1], "state");
      const auto k = detail::parse_field<std::size_t>(f[2], "entry count");
      if (r > 0 && s <= prev) throw CorruptFile("rows out of order at stage " + std::to_string(t));
      prev = s;
      if (f.size() != 3 + k) throw CorruptFile("policy line " + std::to_string(lineno) + ": entry count mismatch");
      PolicyRow row(actions, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        const std::string_view e = f[3 + i];
        const auto colon = e.find(':');
        if (colon == std::string_view::npos) throw CorruptFile("bad policy entry '" + std::string(e) + "'");
        const auto a = detail::parse_field<std::size_t>(e.substr(0, colon), "action");
        const auto w = detail::parse_field<double>(e.substr(colon + 1), "weight");
        if (a >= actions || !(w >= 0.0 && w <= 1.0)) throw CorruptFile("policy entry out of range: " + std::string(e));
        row[a] = w;
      }
      policy.set_row(t, s, std::move(row));
    }
  }
  f = next_line();
  expect(f, "end", 1);
  return policy;
}

inline void save_policy(const std::string& path, const StochasticPolicy& policy, const std::string& layout) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_policy(out, policy, layout);
}

inline StochasticPolicy load_policy(const std::string& path, const std::string& expected_layout,
                                    StochasticPolicy::RowInit init = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open policy '" + path + "'");
  return read_policy(in, expected_layout, std::move(init));
}

// ---------------------------------------------------------------------------------------------
// Exogenous model (chains, windows, solar profile).

namespace detail {

inline nlohmann::json grid_json(const LevelGrid& g) { return {{"lo", g.lo()}, {"step", g.step()}, {"count", g.size()}}; }

inline LevelGrid grid_from_json(const nlohmann::json& j) {
  return LevelGrid(j.at("lo").get<double>(), j.at("step").get<double>(), j.at("count").get<std::size_t>());
}

inline nlohmann::json chain_json(const MarkovChain& c) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& m : c.steps) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
    steps.push_back(std::move(rows));
  }
  return steps;
}

inline MarkovChain chain_from_json(const nlohmann::json& j) {
  MarkovChain c;
  for (const auto& rows : j) {
    TransitionMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() != rows.size()) throw CorruptFile("transition matrix is not square");
      for (std::size_t k = 0; k < r.size(); ++k) m(i, k) = r[k].get<double>();
    }
    c.steps.push_back(std::move(m));
  }
  return c;
}

}  // namespace detail

inline void write_exogenous(std::ostream& out, const ExogenousModel& m) {
  nlohmann::json j;
  j["format"] = "hvacmdp-exogenous";
  j["version"] = kExogenousFormatVersion;
  j["stages"] = m.chains.stages();
  j["grids"] = {{"temp", detail::grid_json(m.chains.temp_grid)},
                {"humid", detail::grid_json(m.chains.humid_grid)},
                {"occ", detail::grid_json(m.chains.occ_grid)}};
  nlohmann::json windows = nlohmann::json::array();
  for (std::size_t t = 0; t < m.temp_windows.size(); ++t)
    windows.push_back({m.temp_windows[t].lo, m.temp_windows[t].hi, m.humid_windows[t].lo, m.humid_windows[t].hi});
  j["windows"] = std::move(windows);
  j["solar"] = m.solar;
  j["chains"] = {{"temp", detail::chain_json(m.chains.temp)},
                 {"humid", detail::chain_json(m.chains.humid)},
                 {"occ", detail::chain_json(m.chains.occ)}};
  out << j.dump(1) << "\n";
  if (!out) throw DataError("failed writing exogenous model");
}

inline ExogenousModel read_exogenous(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("exogenous model: ") + e.what());
  }
  try {
    if (j.value("format", "") != "hvacmdp-exogenous") throw CorruptFile("not an exogenous model file");
    if (j.at("version").get<int>() != kExogenousFormatVersion) throw VersionMismatch("exogenous model version");
    ExogenousModel m;
    m.chains.temp_grid = detail::grid_from_json(j.at("grids").at("temp"));
    m.chains.humid_grid = detail::grid_from_json(j.at("grids").at("humid"));
    m.chains.occ_grid = detail::grid_from_json(j.at("grids").at("occ"));
    m.chains.temp = detail::chain_from_json(j.at("chains").at("temp"));
    m.chains.humid = detail::chain_from_json(j.at("chains").at("humid"));
    m.chains.occ = detail::chain_from_json(j.at("chains").at("occ"));
    for (const auto& w : j.at("windows")) {
      if (w.size() != 4) throw CorruptFile("window entry needs four levels");
      m.temp_windows.push_back({w[0].get<std::size_t>(), w[1].get<std::size_t>()});
      m.humid_windows.push_back({w[2].get<std::size_t>(), w[3].get<std::size_t>()});
    }
    m.solar = j.at("solar").get<std::vector<double>>();
    const auto stages = j.at("stages").get<std::size_t>();
    if (m.chains.stages() != stages || m.temp_windows.size() != stages || m.solar.size() != stages)
      throw CorruptFile("exogenous model sections disagree on the stage count");
    m.chains.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFile(std::string("exogenous model: ") + e.what());
  }
}

inline void save_exogenous(const std::string& path, const ExogenousModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_exogenous(out, m);
}

inline ExogenousModel load_exogenous(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open exogenous model '" + path + "'");
  return read_exogenous(in);
}

// ---------------------------------------------------------------------------------------------
// Logs and tables.

/// One JSON object per line; wall time is the only field that varies between identical runs.
inline std::string iteration_json(const IterationRecord& r) {
  nlohmann::json j = {{"k", r.k},
                      {"mean_cost", r.mean_cost},
                      {"grad_norm", r.grad_norm},
                      {"updated_rows", r.updated_rows},
                      {"clamped_rows", r.clamped_rows},
                      {"damped_rows", r.damped_rows},
                      {"max_mass_drift", r.max_mass_drift},
                      {"paths", r.paths},
                      {"infeasible_paths", r.infeasible_paths},
                      {"wall_seconds", r.wall_seconds}};
  return j.dump();
}

inline std::vector<IterationRecord> read_iteration_log(std::istream& in) {
  std::vector<IterationRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      IterationRecord r;
      r.k = j.at("k").get<std::size_t>();
      r.mean_cost = j.at("mean_cost").get<double>();
      r.grad_norm = j.at("grad_norm").get<double>();
      r.updated_rows = j.at("updated_rows").get<std::size_t>();
      r.clamped_rows = j.at("clamped_rows").get<std::size_t>();
      r.damped_rows = j.value("damped_rows", std::size_t{0});
      r.max_mass_drift = j.at("max_mass_drift").get<double>();
      r.paths = j.at("paths").get<std::size_t>();
      r.infeasible_paths = j.at("infeasible_paths").get<std::size_t>();
      r.wall_seconds = j.at("wall_seconds").get<double>();
      out.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw CorruptFile(std::string("iteration log: ") + e.what());
    }
  }
  return out;
}

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max] of the data; the top edge is inclusive.
inline Histogram make_histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  if (values.empty()) {
    h.edges.assign(bins + 1, 0.0);
    return h;
  }
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn, hi = *mx;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + w * static_cast<double>(i));
  h.edges.back() = hi;
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / w);
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << detail::format_double(h.edges[i]) << "," << detail::format_double(h.edges[i + 1]) << "," << h.counts[i]
        << "\n";
}

inline void write_summary_csv(std::ostream& out, const EvaluationSummary& s) {
  out << "metric,value\n";
  auto row = [&](const char* k, double v) { out << k << "," << detail::format_double(v) << "\n"; };
  row("scenarios", static_cast<double>(s.scenarios));
  row("infeasible", static_cast<double>(s.infeasible));
  row("mean", s.mean);
  row("stddev", s.stddev);
  row("min", s.min);
  row("q05", s.q05);
  row("q25", s.q25);
  row("median", s.q50);
  row("q75", s.q75);
  row("q95", s.q95);
  row("max", s.max);
  row("comfort_frequency", s.comfort_frequency);
  row("comfortable_days", s.comfortable_days);
}

/// Per-scenario costs; NaN marks a scenario without a result.
inline void write_costs_csv(std::ostream& out, const std::vector<double>& costs) {
  out << "scenario,cost\n";
  for (std::size_t i = 0; i < costs.size(); ++i)
    out << i << "," << (std::isnan(costs[i]) ? std::string("nan") : detail::format_double(costs[i])) << "\n";
}

inline std::vector<double> read_costs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "scenario,cost") throw CorruptFile("cost table header");
  std::vector<double> costs;
  while (std::getline(in, line)) {
    const std::string_view l = detail::trim(line);
    if (l.empty()) continue;
    const auto comma = l.find(',');
    if (comma == std::string_view::npos) throw CorruptFile("cost table row '" + std::string(l) + "'");
    if (detail::parse_field<std::size_t>(l.substr(0, comma), "scenario index") != costs.size())
      throw CorruptFile("cost table rows out of order");
    const std::string_view v = l.substr(comma + 1);
    costs.push_back(v == "nan" ? std::nan("") : detail::parse_field<double>(v, "cost"));
  }
  return costs;
}

struct GapReport {
  std::size_t matched = 0;  // scenarios with both costs
  double policy_mean = 0.0;
  double oracle_mean = 0.0;
  double gap_percent = 0.0;  // (policy - oracle) / oracle * 100
};

/// Gap over the scenarios where both sides produced a cost.
inline GapReport gap_report(const std::vector<double>& policy, const std::vector<double>& oracle) {
  if (policy.size() != oracle.size()) throw GridMismatch("policy and oracle cost tables differ in length");
  GapReport g;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (std::isnan(policy[i]) || std::isnan(oracle[i])) continue;
    ++g.matched;
    g.policy_mean += policy[i];
    g.oracle_mean += oracle[i];
  }
  if (g.matched == 0) throw EmptyData("no scenario has both a policy and an oracle cost");
  g.policy_mean /= static_cast<double>(g.matched);
  g.oracle_mean /= static_cast<double>(g.matched);
  if (!(g.oracle_mean > 0.0)) throw NumericError("oracle mean cost is not positive; gap undefined");
  g.gap_percent = 100.0 * (g.policy_mean - g.oracle_mean) / g.oracle_mean;
  return g;
}

}  // namespace hvacmdp
