// hvacmdp: weather synthesis, chain fitting, policy learning, evaluation, oracle and gap report.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hvacmdp/config.hpp"
#include "hvacmdp/io.hpp"
#include "hvacmdp/oracle.hpp"
#include "hvacmdp/tiny_mdp.hpp"

namespace fs = std::filesystem;
using namespace hvacmdp;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kInfeasible = 4, kNumeric = 5 };

struct Common {
  std::string config;
  std::optional<int> case_id;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> scenarios;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> workers;
  std::string out;
  bool quiet = false;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? case_preset(c.case_id.value_or(2)) : load_config(c.config, c.case_id);
  if (c.seed) cfg.seed = *c.seed;
  if (c.paths) cfg.gbpi.n_paths = *c.paths;
  if (c.scenarios) cfg.evaluation.scenarios = *c.scenarios;
  if (c.iterations) cfg.gbpi.max_iterations = *c.iterations;
  if (c.workers) cfg.gbpi.workers = *c.workers;
  if (!c.out.empty()) cfg.out_dir = c.out;
  validate(cfg);
  return cfg;
}

fs::path out_file(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw DataError("cannot write '" + p.string() + "'");
  return f;
}

// Chain file if given, else whatever the config's weather source yields.
ExogenousModel exogenous_for(const ExperimentConfig& cfg, const std::string& chains) {
  return chains.empty() ? fit_exogenous(cfg) : load_exogenous(chains);
}

RolloutMode parse_mode(const std::string& s) {
  if (s == "deploy") return RolloutMode::Deploy;
  if (s == "regenerate") return RolloutMode::Regenerate;
  if (s == "penalize") return RolloutMode::Penalize;
  throw ConfigError("mode must be deploy, regenerate or penalize");
}

void print_summary(const EvaluationSummary& s) {
  std::printf("scenarios %zu (dropped %zu)\n", s.scenarios, s.infeasible);
  std::printf("mean cost %.6f  sd %.6f\n", s.mean, s.stddev);
  std::printf("quantiles  min %.4f  q05 %.4f  q25 %.4f  median %.4f  q75 %.4f  q95 %.4f  max %.4f\n", s.min, s.q05,
              s.q25, s.q50, s.q75, s.q95, s.max);
  std::printf("comfort frequency %.4f  comfortable days %.4f\n", s.comfort_frequency, s.comfortable_days);
}

int cmd_synth_weather(const Common& c, std::optional<std::size_t> days) {
  ExperimentConfig cfg = resolve(c);
  const WeatherSeries w = synth_weather(cfg.weather.profile, days.value_or(cfg.weather.days), cfg.weather_seed());
  const fs::path p = out_file(cfg, "weather.csv");
  auto f = open_out(p);
  write_weather_csv(f, w);
  if (!c.quiet) std::printf("wrote %s (%zu days)\n", p.string().c_str(), w.size());
  return kOk;
}

int cmd_estimate_chains(const Common& c, const std::string& weather) {
  ExperimentConfig cfg = resolve(c);
  if (!weather.empty()) cfg.weather.csv = weather;
  const ExogenousModel m = fit_exogenous(cfg);
  const fs::path p = out_file(cfg, "chains.json");
  auto f = open_out(p);
  write_exogenous(f, m);
  if (!c.quiet) std::printf("wrote %s (%zu stages)\n", p.string().c_str(), m.chains.stages());
  return kOk;
}

int cmd_learn(const Common& c, const std::string& chains) {
  ExperimentConfig cfg = resolve(c);
  const auto env = build_environment(cfg, exogenous_for(cfg, chains));
  GbpiConfig g = cfg.gbpi;
  g.seed = cfg.learn_seed();
  // Held-out days for the trace; deployed behaviour, so the numbers compare across iterations.
  const auto held_out = env->scenarios(cfg.evaluation.scenarios, cfg.trace_seed());
  auto cost = [&](const StochasticPolicy& p) {
    return env->evaluate(p, held_out, RolloutMode::Deploy, cfg.trace_seed(), g.workers).mean;
  };
  auto log = open_out(out_file(cfg, "iterations.jsonl"));
  const GbpiResult res = run_gbpi_mc(*env, env->initial_policy(), cost, g, [&](const IterationRecord& r) {
    log << iteration_json(r) << "\n" << std::flush;
    if (!c.quiet)
      std::printf("iter %2zu  cost %.5f  step %.3e  rows %zu  damped %zu  dropped %zu  %.2fs\n", r.k, r.mean_cost,
                  r.grad_norm, r.updated_rows, r.damped_rows, r.infeasible_paths, r.wall_seconds);
  });
  save_policy(out_file(cfg, "policy.txt").string(), res.policy, policy_layout(*env));
  {
    auto f = open_out(out_file(cfg, "config.ini"));
    f << dump_config(cfg);
  }
  if (!c.quiet)
    std::printf("final cost %.5f after %zu iterations%s\n", res.final_cost, res.trace.size(),
                res.converged ? " (converged)" : "");
  return kOk;
}

int cmd_evaluate(const Common& c, const std::string& chains, std::string policy_path, bool initial,
                 const std::string& mode_name, const std::string& prefix) {
  ExperimentConfig cfg = resolve(c);
  const auto env = build_environment(cfg, exogenous_for(cfg, chains));
  StochasticPolicy policy = env->initial_policy();
  if (!initial) {
    if (policy_path.empty()) policy_path = (fs::path(cfg.out_dir) / "policy.txt").string();
    policy = load_policy(policy_path, policy_layout(*env), [e = env.get()](std::size_t t, std::size_t s) {
      return e->initial_row(t, s);
    });
  }
  const auto sc = env->scenarios(cfg.evaluation.scenarios, cfg.eval_seed());
  const EvaluationSummary s = env->evaluate(policy, sc, parse_mode(mode_name), cfg.eval_seed(), cfg.gbpi.workers);
  {
    auto f = open_out(out_file(cfg, prefix + "summary.csv"));
    write_summary_csv(f, s);
  }
  {
    auto f = open_out(out_file(cfg, prefix + "costs.csv"));
    write_costs_csv(f, s.by_scenario);
  }
  {
    auto f = open_out(out_file(cfg, prefix + "histogram.csv"));
    write_histogram_csv(f, make_histogram(s.costs, cfg.evaluation.histogram_bins));
  }
  {
    auto f = open_out(out_file(cfg, prefix + "pmv_histogram.csv"));
    write_histogram_csv(f, make_histogram(s.pmv, cfg.evaluation.histogram_bins));
  }
  if (!c.quiet) print_summary(s);
  return kOk;
}

int cmd_oracle(const Common& c, const std::string& chains, bool tiny) {
  if (tiny) {
    const TinyMdp t = build_tiny_mdp();
    const DpSolution sol = solve_dp(t.mdp);
    std::printf("tiny MDP: %zu states, %zu actions, %zu stages\n", t.mdp.n_states, t.mdp.n_actions, t.mdp.n_stages);
    std::printf("optimal expected cost %.12f\n", sol.j);
    return kOk;
  }
  ExperimentConfig cfg = resolve(c);
  const auto env = build_environment(cfg, exogenous_for(cfg, chains));
  const auto sc = env->scenarios(cfg.evaluation.scenarios, cfg.eval_seed());
  std::vector<double> costs(sc.size(), std::nan(""));
  std::size_t infeasible = 0;
  parallel_for(sc.size(), cfg.gbpi.workers, [&](std::size_t i) {
    try {
      costs[i] = solve_perfect_information(*env, sc[i], cfg.oracle).cost;
    } catch (const InfeasibleError&) {
    }
  });
  double mean = 0.0;
  std::size_t n = 0;
  for (double v : costs) {
    if (std::isnan(v)) {
      ++infeasible;
      continue;
    }
    mean += v;
    ++n;
  }
  if (n == 0) throw NoPaths("no scenario admits a comfortable control sequence");
  mean /= static_cast<double>(n);
  auto f = open_out(out_file(cfg, "oracle_costs.csv"));
  write_costs_csv(f, costs);
  if (!c.quiet) std::printf("perfect-information oracle: %zu scenarios, %zu infeasible, mean cost %.6f\n", sc.size(), infeasible, mean);
  return kOk;
}

double summary_value(const fs::path& p, const std::string& metric) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma != std::string::npos && line.substr(0, comma) == metric) return std::stod(line.substr(comma + 1));
  }
  throw CorruptFile(p.string() + " has no '" + metric + "' row");
}

std::vector<double> costs_from(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  return read_costs_csv(in);
}

int cmd_report(const Common& c) {
  ExperimentConfig cfg = resolve(c);
  const fs::path dir(cfg.out_dir);
  const GapReport g = gap_report(costs_from(dir / "costs.csv"), costs_from(dir / "oracle_costs.csv"));
  const double comfort = summary_value(dir / "summary.csv", "comfort_frequency");
  auto f = open_out(dir / "report.csv");
  f << "metric,value\n"
    << "matched_scenarios," << g.matched << "\n"
    << "policy_mean," << detail::format_double(g.policy_mean) << "\n"
    << "oracle_mean," << detail::format_double(g.oracle_mean) << "\n"
    << "gap_percent," << detail::format_double(g.gap_percent) << "\n"
    << "comfort_frequency," << detail::format_double(comfort) << "\n";
  if (!c.quiet)
    std::printf("policy %.5f  oracle %.5f  gap %.2f%%  comfort %.4f  (%zu scenarios)\n", g.policy_mean, g.oracle_mean,
                g.gap_percent, comfort, g.matched);
  return kOk;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case Error::Kind::Config:
    case Error::Kind::Usage: return kConfig;
    case Error::Kind::Data: return kData;
    case Error::Kind::Infeasible: return kInfeasible;
    case Error::Kind::Numeric: return kNumeric;
  }
  return kOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-policy HVAC control by gradient-based policy iteration"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--config", c.config, "experiment config file (sectioned key = value)");
  app.add_option("--case", c.case_id, "case preset")->check(CLI::Range(1, 3));
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--paths", c.paths, "sample paths per iteration");
  app.add_option("--scenarios", c.scenarios, "evaluation scenarios");
  app.add_option("--iterations", c.iterations, "iteration cap");
  app.add_option("--workers", c.workers, "worker threads");
  app.add_option("--out", c.out, "output directory");
  app.add_flag("-q,--quiet", c.quiet, "no progress output");

  std::optional<std::size_t> days;
  auto* synth = app.add_subcommand("synth-weather", "write synthetic minute-level weather");
  synth->add_option("--days", days, "number of days");

  std::string weather;
  auto* est = app.add_subcommand("estimate-chains", "fit exogenous chains from weather data");
  est->add_option("--weather", weather, "weather CSV (default: config source)");

  std::string chains, policy, mode = "deploy", prefix;
  bool initial = false, tiny = false;
  auto* learn = app.add_subcommand("learn", "run GBPI and write the policy and iteration log");
  learn->add_option("--chains", chains, "chain file from estimate-chains");

  auto* eval = app.add_subcommand("evaluate", "cost and comfort of a policy over evaluation scenarios");
  eval->add_option("--chains", chains, "chain file");
  eval->add_option("--policy", policy, "policy file (default: <out>/policy.txt)");
  eval->add_flag("--initial", initial, "evaluate the untrained initial policy");
  eval->add_option("--mode", mode, "deploy, regenerate or penalize");
  eval->add_option("--prefix", prefix, "prefix for the output file names");

  auto* oracle = app.add_subcommand("oracle", "perfect-information costs of the evaluation scenarios");
  oracle->add_option("--chains", chains, "chain file");
  oracle->add_flag("--tiny", tiny, "solve the small enumerable MDP by backward induction instead");

  auto* report = app.add_subcommand("report", "gap of the evaluated policy against the oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*synth) return cmd_synth_weather(c, days);
    if (*est) return cmd_estimate_chains(c, weather);
    if (*learn) return cmd_learn(c, chains);
    if (*eval) return cmd_evaluate(c, chains, policy, initial, mode, prefix);
    if (*oracle) return cmd_oracle(c, chains, tiny);
    if (*report) return cmd_report(c);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOther;
  }
  return kOther;
}
