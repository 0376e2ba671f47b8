#include <gtest/gtest.h>

#include <cmath>

#include "hvacmdp/enumerated.hpp"
#include "hvacmdp/gbpi.hpp"
#include "hvacmdp/oracle.hpp"
#include "hvacmdp/tiny_mdp.hpp"
#include "../support/oracles.hpp"

using namespace hvacmdp;

TEST(Policy, DefaultRowsMaskingAndValidation) {
  StochasticPolicy p(2, 3);
  EXPECT_EQ(p.row(0, 7), uniform_row(3));
  EXPECT_EQ(p.explicit_rows(), 0u);
  p.mask(0, 7, 1);
  EXPECT_EQ(p.weight(0, 7, 1), 0.0);
  EXPECT_NEAR(p.mass(0, 7), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(p.explicit_rows(), 1u);
  EXPECT_THROW(p.set_row(0, 1, {0.5, 0.5}), ConfigError);
  EXPECT_THROW(p.set_row(0, 1, {1.5, 0.0, 0.0}), ConfigError);
  EXPECT_THROW(p.mask(0, 1, 3), OutOfRange);
  StochasticPolicy q(1, 2, [](std::size_t, std::size_t s) { return PolicyRow{s % 2 ? 1.0 : 0.0, s % 2 ? 0.0 : 1.0}; });
  EXPECT_EQ(q.row(0, 3), (PolicyRow{1.0, 0.0}));
  q.mask(0, 3, 1);  // already zero: no row materialized
  EXPECT_EQ(q.explicit_rows(), 0u);
}

TEST(Policy, EditsReviveOnlyEmptyRows) {
  StochasticPolicy p(1, 2);
  apply_edits(p, {{PolicyEdit::Kind::Revive, 0, 0, 1}});
  EXPECT_EQ(p.row(0, 0), uniform_row(2));
  apply_edits(p, {{PolicyEdit::Kind::Mask, 0, 0, 0}, {PolicyEdit::Kind::Mask, 0, 0, 1},
                  {PolicyEdit::Kind::Revive, 0, 0, 1}, {PolicyEdit::Kind::Revive, 0, 0, 0}});
  EXPECT_EQ(p.row(0, 0), (PolicyRow{0.0, 1.0}));
}

TEST(Exact, EvaluationMatchesForwardPropagation) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const EnumeratedMdp m = make_random_mdp(5, 6, 3, seed, 3);
    m.validate();
    const StochasticPolicy p = make_random_policy(m, seed + 100, 0.7);
    EXPECT_NEAR(expected_cost(m, p), oracle::forward_cost(m, p), 1e-12);
  }
}

TEST(Exact, BackwardInductionMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const EnumeratedMdp m = make_random_mdp(3, 2, 3, seed);
    const DpSolution sol = solve_dp(m);
    EXPECT_NEAR(sol.j, oracle::brute_force_optimum(m), 1e-12);
    EXPECT_NEAR(expected_cost(m, sol.to_policy(m.n_actions)), sol.j, 1e-12);
  }
}

TEST(Exact, DpIsLowerBoundOnRandomPolicies) {
  const TinyMdp tiny = build_tiny_mdp();
  const double j_star = solve_dp(tiny.mdp).j;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    EXPECT_GE(expected_cost(tiny.mdp, make_random_policy(tiny.mdp, seed)), j_star - 1e-12);
}

TEST(Exact, DeadRowRejected) {
  const EnumeratedMdp m = make_random_mdp(2, 2, 2, 1);
  StochasticPolicy p(2, 2);
  p.set_row(0, 0, {0.0, 0.0});
  EXPECT_THROW(expected_cost(m, p), DeadState);
  EXPECT_THROW(make_random_mdp(100, 100, 200, 1).check_size(), TooLarge);
}

TEST(Gradient, DpDsigmaColumnsSumToZero) {
  Rng rng(17);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> row(5);
    for (double& x : row) x = uniform01(rng);
    double total = 0.0;
    for (std::size_t b = 0; b < 5; ++b) total += dp_dsigma(row, 2, b);
    EXPECT_NEAR(total, 0.0, 1e-12);
  }
}

TEST(Gradient, DpDsigmaMatchesDifferenceQuotient) {
  const std::vector<double> row{0.2, 0.5, 0.1};
  const double h = 1e-7;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      auto p = [&](double delta) {
        auto r = row;
        r[a] += delta;
        return r[b] / (r[0] + r[1] + r[2]);
      };
      EXPECT_NEAR(dp_dsigma(row, a, b), (p(h) - p(-h)) / (2 * h), 1e-8);
    }
}

TEST(Gradient, ExactMatchesFiniteDifferences) {
  const EnumeratedMdp m = make_random_mdp(3, 4, 3, 5, 2);
  const StochasticPolicy p = make_random_policy(m, 6, 0.8);
  const GradientEstimate g = exact_gradient(m, p);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(g.get(t, s, a), oracle::fd_gradient(m, p, t, s, a), 1e-7);
}

TEST(Gradient, RowGradientIsOrthogonalToSigma) {
  const std::vector<double> sigma{0.1, 0.3, 0.2}, q{1.0, 4.0, -2.0};
  const auto g = gradient_row(0.4, sigma, q);
  double dot = 0.0;
  for (std::size_t a = 0; a < 3; ++a) dot += sigma[a] * g[a];
  EXPECT_NEAR(dot, 0.0, 1e-15);
  EXPECT_EQ(gradient_row(0.0, sigma, q), std::vector<double>(3, 0.0));
}

TEST(Update, PreservesMassAndDescends) {
  const EnumeratedMdp m = make_random_mdp(4, 5, 3, 9, 2);
  StochasticPolicy p = make_random_policy(m, 10, 0.6);
  double j = expected_cost(m, p);
  for (int k = 0; k < 30; ++k) {
    const StochasticPolicy before = p;
    const UpdateStats u = update_policy(p, exact_gradient(m, p), UpdateOptions{1.0, 0.5});
    EXPECT_EQ(u.clamped_rows, 0u);
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t s = 0; s < 5; ++s) EXPECT_NEAR(p.mass(t, s), before.mass(t, s), 1e-12);
    const double next = expected_cost(m, p);
    EXPECT_LE(next, j + 1e-12);
    j = next;
  }
}

TEST(Update, DampingCapsRelativeDecrease) {
  StochasticPolicy p(1, 3);
  p.set_row(0, 0, {0.2, 0.3, 0.5});
  GradientEstimate g;
  g.n_actions = 3;
  g.rows.resize(1);
  RowEstimate r;
  r.grad = {5.0, 0.0, -2.0};
  g.rows[0].emplace(0, r);
  const PolicyRow before = p.row(0, 0);
  const UpdateStats u = update_policy(p, g, UpdateOptions{1.0, 0.4});
  EXPECT_EQ(u.damped_rows, 1u);
  const PolicyRow after = p.row(0, 0);
  EXPECT_NEAR(after[0], before[0] * 0.6, 1e-15);
  EXPECT_EQ(after[1], before[1]);
  EXPECT_THROW(update_policy(p, g, UpdateOptions{0.0, 0.0}), ConfigError);
  EXPECT_THROW(update_policy(p, g, UpdateOptions{1.0, 1.0}), ConfigError);
}

TEST(Update, ClampKeepsMassAndZeros) {
  std::vector<double> row{0.0, 1.4, -0.2, 0.3};
  clamp_and_rescale(row, 1.2);
  EXPECT_EQ(row[0], 0.0);
  EXPECT_EQ(row[2], 0.0);
  double total = 0.0;
  for (double x : row) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
    total += x;
  }
  EXPECT_NEAR(total, 1.2, 1e-12);
}

TEST(Learn, ExactRunReachesDpValue) {
  const EnumeratedMdp m = make_random_mdp(3, 4, 3, 21, 2);
  GbpiConfig cfg;
  cfg.epsilon = 1e-10;
  cfg.max_iterations = 3000;
  cfg.cost_scale = 50.0;
  cfg.max_decrease = 0.9;
  const GbpiResult r = run_gbpi_exact(m, make_random_policy(m, 22), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.final_cost, solve_dp(m).j, 1e-7);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].mean_cost, r.trace[k - 1].mean_cost + 1e-12);
}

TEST(Learn, PerformanceDifferenceIdentity) {
  const EnumeratedMdp m = make_random_mdp(4, 5, 3, 31, 3);
  for (std::uint64_t k = 0; k < 10; ++k) {
    const StochasticPolicy mu = make_random_policy(m, 100 + k), sigma = make_random_policy(m, 200 + k, 0.5);
    EXPECT_NEAR(performance_difference(m, mu, sigma), oracle::forward_cost(m, mu) - oracle::forward_cost(m, sigma),
                1e-12);
  }
}

TEST(MonteCarlo, GradientAgreesWithExactOnSmallMdp) {
  const EnumeratedMdp m = make_random_mdp(2, 2, 2, 41, 2);
  StochasticPolicy p = make_random_policy(m, 42);
  const GradientEstimate exact = exact_gradient(m, p);
  McOptions opt;
  opt.n_paths = 400000;
  opt.min_visits = 100;
  const GradientEstimate mc = estimate_gradient(m, p, opt, 43);
  for (std::size_t t = 0; t < 2; ++t)
    for (const auto& [s, row] : mc.rows[t])
      for (std::size_t a = 0; a < 2; ++a) {
        if (row.action_visits[a] < 100) continue;
        const double e = exact.get(t, s, a);
        EXPECT_NEAR(row.grad[a], e, 0.05 * std::abs(e) + 1e-4) << t << " " << s << " " << a;
      }
}

TEST(MonteCarlo, DeterministicAcrossWorkerCounts) {
  const EnumeratedMdp m = make_random_mdp(4, 6, 3, 51, 2);
  StochasticPolicy p1 = make_random_policy(m, 52), p2 = p1;
  McOptions a;
  a.n_paths = 3000;
  a.wave_size = 100;
  McOptions b = a;
  b.workers = 3;
  const GradientEstimate g1 = estimate_gradient(m, p1, a, 9, 4), g2 = estimate_gradient(m, p2, b, 9, 4);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t s = 0; s < 6; ++s)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(g1.get(t, s, c), g2.get(t, s, c));
}

TEST(MonteCarlo, UntrustedActionsGetNoGradient) {
  detail::RowCounts rc;
  rc.visits = 30;
  rc.n = {25, 5, 0};
  rc.sum_r = {25.0, 10.0, 0.0};
  rc.sum_v = {0.0, 0.0, 0.0};
  const std::vector<double> sigma{0.5, 0.3, 0.2};
  const RowEstimate row = assemble_row(rc, 100, sigma, 10);
  EXPECT_TRUE(row.trusted[0]);
  EXPECT_FALSE(row.trusted[1]);
  EXPECT_EQ(row.grad[1], 0.0);
  EXPECT_EQ(row.grad[2], 0.0);
  // One trusted action carries the row's baseline, so it gets no push either.
  EXPECT_NEAR(row.grad[0], 0.0, 1e-15);
  EXPECT_NEAR(row.pi, 0.3, 1e-15);
}

TEST(StepNorm, VanishesAtDeterministicOptimum) {
  const EnumeratedMdp m = make_random_mdp(3, 3, 2, 61);
  const StochasticPolicy opt = solve_dp(m).to_policy(2);
  EXPECT_NEAR(step_norm(opt, exact_gradient(m, opt)), 0.0, 1e-15);
}
