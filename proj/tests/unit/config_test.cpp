#include <gtest/gtest.h>

#include <sstream>

#include "hvacmdp/config.hpp"

using namespace hvacmdp;

namespace {

ExperimentConfig parse(const std::string& text, std::optional<int> override_case = std::nullopt) {
  std::istringstream in(text);
  return parse_config(in, override_case);
}

}  // namespace

TEST(Config, PresetsDiffer) {
  const ExperimentConfig c1 = case_preset(1), c2 = case_preset(2), c3 = case_preset(3);
  EXPECT_EQ(c1.actions.fcu_temps.size(), 3u);
  EXPECT_EQ(c2.actions.fcu_temps, std::vector<double>{15.0});
  EXPECT_EQ(c3.grids.temp_step, 1.0);
  EXPECT_THROW(case_preset(4), ConfigError);
}

TEST(Config, EmptyFileIsCaseTwo) {
  const ExperimentConfig c = parse("");
  EXPECT_EQ(c.case_id, 2);
  EXPECT_EQ(dump_config(c), dump_config(case_preset(2)));
}

TEST(Config, KeysOverridePreset) {
  const ExperimentConfig c = parse("[experiment]\ncase = 1\nseed = 42\n[gbpi]\npaths = 77\n[comfort]\npmv_high = 0.7\n");
  EXPECT_EQ(c.case_id, 1);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.gbpi.n_paths, 77u);
  EXPECT_EQ(c.model.comfort.band.pmv_high, 0.7);
  EXPECT_EQ(c.actions.fcu_temps.size(), 3u);
  EXPECT_EQ(parse("[experiment]\ncase = 1\n", 3).case_id, 3);
}

TEST(Config, UnknownAndMalformedKeysRejected) {
  EXPECT_THROW(parse("[gbpi]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("[nosuchsection]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse("seed = 1\n"), ConfigError);
  EXPECT_THROW(parse("[gbpi]\npaths = many\n"), ConfigError);
  EXPECT_THROW(parse("[comfort]\npmv_low = 1\npmv_high = 0\n"), ConfigError);
  EXPECT_THROW(parse("[experiment]\nprice = 0-12:0.1\n"), ConfigError);
  EXPECT_THROW(parse("[gbpi]\nlearning_mode = deploy\n"), ConfigError);
  EXPECT_THROW(parse("[gbpi\n"), ConfigError);
}

TEST(Config, DumpRoundTrips) {
  ExperimentConfig c = case_preset(1);
  c.seed = 99;
  c.model.building.room.m_air = 150.25;
  c.model.price = PriceSchedule::parse("0-8:0.1,8-20:0.3,20-24:0.1");
  c.weather.csv = "data/w.csv";
  c.gbpi.max_decrease = 0.25;
  const std::string text = dump_config(c);
  EXPECT_EQ(dump_config(parse(text)), text);
}

TEST(Config, MissingFileIsConfigError) { EXPECT_THROW(load_config("/nonexistent/x.ini"), ConfigError); }

TEST(Config, SeedsAreIndependentStreams) {
  ExperimentConfig c;
  EXPECT_NE(c.learn_seed(), c.eval_seed());
  EXPECT_NE(c.trace_seed(), c.eval_seed());
  ExperimentConfig d;
  d.seed = 2;
  EXPECT_NE(c.learn_seed(), d.learn_seed());
}

TEST(Config, MissingWeatherFileIsDataError) {
  ExperimentConfig c = case_preset(2);
  c.weather.csv = "/nonexistent/weather.csv";
  EXPECT_THROW(fit_exogenous(c), DataError);
}

TEST(Config, EnvironmentRejectsForeignChains) {
  ExperimentConfig a = case_preset(2), b = case_preset(3);
  a.weather.days = b.weather.days = 4;
  EXPECT_THROW(build_environment(a, fit_exogenous(b)), GridMismatch);
}
