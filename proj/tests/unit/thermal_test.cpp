#include <gtest/gtest.h>

#include <cmath>

#include "hvacmdp/grid.hpp"
#include "hvacmdp/price.hpp"
#include "hvacmdp/psychro.hpp"
#include "hvacmdp/thermal.hpp"

using namespace hvacmdp;

TEST(Fan, CubicLawAtRatedFractions) {
  HvacParams h;
  for (double frac : {0.0, 0.5, 1.0}) {
    EXPECT_EQ(fan_power(h.fcu_rated_fan_power, frac * h.fcu_rated_flow, h.fcu_rated_flow),
              h.fcu_rated_fan_power * frac * frac * frac);
    EXPECT_EQ(fan_power(h.fau_rated_fan_power, frac * h.fau_rated_flow, h.fau_rated_flow),
              h.fau_rated_fan_power * frac * frac * frac);
  }
  EXPECT_EQ(fan_power(0.1, 0.05, 0.05), 0.1);
  EXPECT_EQ(fan_power(0.1, 0.025, 0.05), 0.0125);
  EXPECT_DOUBLE_EQ(fan_power(0.1, 0.1, 0.05), 0.8);
}

TEST(Dynamics, EquilibriumStaysPut) {
  Building b;
  const ContinuousState s{28.0, 0.6, 28.0, 28.0};
  const ExogenousSample exo{28.0, 0.6, 0.0, 0.0, 0.2};
  const ControlInput off{0.0, 15.0, 0.0, 15.0};
  const ContinuousState n = step_dynamics(b, s, exo, off, 1800.0);
  EXPECT_NEAR(n.t_indoor, 28.0, 1e-12);
  EXPECT_NEAR(n.t_wall_left, 28.0, 1e-12);
  EXPECT_NEAR(n.t_wall_right, 28.0, 1e-12);
  EXPECT_NEAR(n.rh_indoor, 0.6, 1e-12);
}

TEST(Dynamics, AirBalanceByHand) {
  Building b;
  const RoomParams& r = b.room;
  const ContinuousState s{26.0, 0.5, 25.0, 27.0};
  const ExogenousSample exo{31.0, 0.7, 2.0, 80.0, 0.24};
  const ControlInput u{0.005, 15.0, 0.05, 14.0};
  const double dt = 60.0;
  const double q = 2.0 * (r.q_occupant + b.hvac.device_heat_per_occupant) + r.h_glass * r.a_glass * 5.0 +
                   r.h_wall * r.a_wall_left * (-1.0) + r.h_wall * r.a_wall_right * 1.0 +
                   r.cp_air * 0.005 * (15.0 - 26.0) + r.cp_air * 0.05 * (14.0 - 26.0);
  const ContinuousState n = step_dynamics(b, s, exo, u, dt);
  EXPECT_NEAR(n.t_indoor, 26.0 + q * dt / (r.cp_air * r.m_air), 1e-12);
  const double q_right = r.h_wall * r.a_wall_right * (26.0 - 27.0) + r.alpha_wall * r.a_wall_right * 80.0;
  EXPECT_NEAR(n.t_wall_right, 27.0 + q_right * dt / (r.c_wall * r.m_wall_right), 1e-12);
}

TEST(Dynamics, CoolingLowersTemperatureAndCostsMoney) {
  Building b;
  const ContinuousState s{27.0, 0.6, 27.0, 27.0};
  const ExogenousSample exo{30.0, 0.7, 3.0, 50.0, 0.24};
  const ControlInput off{0.0, 15.0, 0.0, 15.0};
  const ControlInput on{0.01, 15.0, 0.1, 15.0};
  EXPECT_LT(step_dynamics(b, s, exo, on, 1800.0).t_indoor, step_dynamics(b, s, exo, off, 1800.0).t_indoor);
  EXPECT_EQ(stage_cost(b, s, exo, off, 1800.0), 0.0);
  EXPECT_GT(stage_cost(b, s, exo, on, 1800.0), 0.0);
  EXPECT_DOUBLE_EQ(stage_cost(b, s, exo, off, 1800.0, 3.0), 3.0);
}

TEST(Dynamics, CostScalesWithPriceAndDuration) {
  Building b;
  const ContinuousState s{27.0, 0.6, 27.0, 27.0};
  ExogenousSample exo{30.0, 0.7, 1.0, 0.0, 0.16};
  const ControlInput u{0.005, 15.0, 0.05, 15.0};
  const double c1 = stage_cost(b, s, exo, u, 1800.0);
  exo.price = 0.24;
  EXPECT_NEAR(stage_cost(b, s, exo, u, 1800.0), 1.5 * c1, 1e-15);
  EXPECT_NEAR(stage_cost(b, s, exo, u, 3600.0), 3.0 * c1, 1e-15);
  const PowerBreakdown p = hvac_power(b, s, exo, u);
  EXPECT_NEAR(c1, 0.16 * p.electrical(b.hvac.eta) * 0.5, 1e-15);
}

TEST(Dynamics, FcuDoesNotAddMoisture) {
  Building b;
  const ContinuousState s{26.0, 0.55, 26.0, 26.0};
  const ExogenousSample exo{26.0, 0.55, 0.0, 0.0, 0.2};
  const ControlInput dry{0.0, 15.0, 0.1, 12.0};
  const ContinuousState n = step_dynamics(b, s, exo, dry, 600.0);
  EXPECT_LE(psychro::humidity_ratio(n.t_indoor, n.rh_indoor), psychro::humidity_ratio(26.0, 0.55) + 1e-15);
}

TEST(Dynamics, RejectsBadStep) {
  Building b;
  EXPECT_THROW(step_dynamics(b, {}, {}, {}, 0.0), NumericError);
  EXPECT_THROW(stage_cost(b, {}, {}, {}, -1.0), NumericError);
}

TEST(Params, Validation) {
  RoomParams r;
  r.m_air = 0.0;
  EXPECT_THROW(r.validate(), ConfigError);
  HvacParams h;
  h.fcu_flow = {0.2, 0.1};
  EXPECT_THROW(h.validate(), ConfigError);
  HvacParams ok;
  EXPECT_TRUE(within_bounds(ok, {0.01, 15.0, 0.1, 12.0}));
  EXPECT_FALSE(within_bounds(ok, {0.02, 15.0, 0.1, 12.0}));
}

TEST(Grid, LevelsAndNearest) {
  const LevelGrid g = LevelGrid::covering(18.0, 30.0, 2.0);
  EXPECT_EQ(g.size(), 7u);
  EXPECT_DOUBLE_EQ(g.hi(), 30.0);
  EXPECT_EQ(g.level(18.9), 0u);
  EXPECT_EQ(g.level(19.1), 1u);
  EXPECT_EQ(g.level(-100.0), 0u);
  EXPECT_EQ(g.level(100.0), 6u);
  const LevelGrid s = LevelGrid::spread(0.0, 5.0, 5);
  EXPECT_DOUBLE_EQ(s.value(4), 5.0);
  EXPECT_THROW(LevelGrid(0.0, 1.0, 0), ConfigError);
}

TEST(Price, TwoTierSchedule) {
  const PriceSchedule p = PriceSchedule::parse("0-9:0.16,9-21:0.24,21-24:0.16");
  EXPECT_DOUBLE_EQ(p.at_hour(3.0), 0.16);
  EXPECT_DOUBLE_EQ(p.at_hour(9.0), 0.24);
  EXPECT_DOUBLE_EQ(p.at_hour(20.99), 0.24);
  EXPECT_DOUBLE_EQ(p.at_hour(21.0), 0.16);
  EXPECT_DOUBLE_EQ(p.max_price(), 0.24);
  EXPECT_EQ(PriceSchedule::parse(p.to_string()).to_string(), p.to_string());
  EXPECT_THROW(PriceSchedule::parse("0-9:0.16,10-24:0.2"), ConfigError);
  EXPECT_THROW(PriceSchedule::parse("0-24:x"), ConfigError);
}
