#include "msrate/rnvi.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "msrate/errors.h"
#include "msrate/riccati.h"
#include "test_util.h"

namespace msrate {
namespace {

RnviConfig default_config() {
  RnviConfig cfg;
  cfg.tau_grid = default_tau_grid();
  return cfg;
}

GTEST_TEST(TauGridTest, Examples) {
  EXPECT_EQ(default_tau_grid(0.5, 1e-5, 2), (std::vector<double>{0.5, 1e-5}));
  const std::vector<double> g3 = default_tau_grid(0.1, 0.001, 3);
  EXPECT_EQ(g3.front(), 0.1);
  EXPECT_NEAR(g3[1], 0.01, 1e-16);
  EXPECT_EQ(g3.back(), 0.001);

  const std::vector<double> g = default_tau_grid();
  ASSERT_EQ(g.size(), 40u);
  EXPECT_EQ(g.front(), 0.5);
  EXPECT_EQ(g.back(), 1e-5);
  const double ratio = std::pow(1e-5 / 0.5, 1.0 / 39.0);
  for (std::size_t j = 1; j < g.size(); ++j) {
    EXPECT_LT(g[j], g[j - 1]);
    EXPECT_NEAR(g[j] / g[j - 1], ratio, 1e-12);
  }
}

GTEST_TEST(TauGridTest, Errors) {
  EXPECT_THROW(default_tau_grid(0.5, 1e-5, 1), ConfigError);
  EXPECT_THROW(default_tau_grid(1e-5, 0.5, 10), ConfigError);
  EXPECT_THROW(default_tau_grid(1.0, 0.5, 10), ConfigError);
  EXPECT_THROW(default_tau_grid(0.5, 0.0, 10), ConfigError);
}

GTEST_TEST(RnviConfigTest, Validation) {
  RnviConfig cfg;
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.tau_grid = {0.5, 0.5};
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.tau_grid = {0.5, 0.1};
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.epsilon = 1e-12;
  cfg.max_inner_iters = 0;
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.max_inner_iters = 10;
  cfg.P0 = SymMatrix::identity(2);
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.P0 = 0.5 * SymMatrix::identity(2);
  EXPECT_NO_THROW(cfg.validate(2));
  EXPECT_THROW(cfg.validate(3), ConfigError);
}

GTEST_TEST(SolveAtTauTest, ScalarConvergesImmediately) {
  const double a = 1.2, a_bar = 0.5, b = 1.0, b_bar = 0.3, sigma = 1.0;
  const SystemSpec s = testing::scalar_spec(a, a_bar, b, b_bar, sigma);
  const double g = testing::scalar_gamma(a, a_bar, b, b_bar, sigma);
  const FixedPointRecord r = solve_at_tau(s, 0.01, SymMatrix::identity(1));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.inner_iters, 1);
  EXPECT_EQ(r.P(0, 0), 1.0);
  EXPECT_NEAR(r.gamma, 0.99 * g + 0.01, 1e-14);
}

GTEST_TEST(SolveAtTauTest, IterationCountAtSigmaThree) {
  const SystemSpec s = testing::system2d(3.0);
  const FixedPointRecord r = solve_at_tau(s, 1e-3, 0.5 * SymMatrix::identity(2));
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.inner_iters, 5);
  EXPECT_LE(r.inner_iters, 60);
}

GTEST_TEST(SolveAtTauTest, LargeTauConvergesFromCenter) {
  std::mt19937_64 rng(37);
  std::vector<SystemSpec> specs{testing::system2d(1.0), testing::system2d(3.0),
                                testing::system4d()};
  for (int trial = 0; trial < 20; ++trial) {
    specs.push_back(testing::random_spec(rng, 1 + trial % 5, 1 + trial % 3));
  }
  for (const SystemSpec& s : specs) {
    const int n = s.n();
    const FixedPointRecord r = solve_at_tau(s, 0.5, (1.0 / n) * SymMatrix::identity(n));
    EXPECT_TRUE(r.converged);
  }
}

GTEST_TEST(SolveAtTauTest, IterationCapIsNotAnError) {
  const FixedPointRecord r =
      solve_at_tau(testing::system4d(), 1e-5, 0.25 * SymMatrix::identity(4), 1e-12, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.inner_iters, 3);
  EXPECT_GT(r.residual, 1e-12);
  EXPECT_EQ(r.K.rows(), 2);
}

// Observed step ratios at the largest τ are below one on the reference systems.
GTEST_TEST(SolveAtTauTest, ContractionWitness) {
  for (const SystemSpec& s : {testing::system2d(1.0), testing::system2d(1.5),
                              testing::system2d(2.0), testing::system2d(3.0),
                              testing::system4d()}) {
    std::vector<double> steps;
    const int n = s.n();
    solve_at_tau(s, 0.5, (1.0 / n) * SymMatrix::identity(n), 1e-12, 10000,
                 [&](int, double norm) { steps.push_back(norm); });
    ASSERT_GE(steps.size(), 3u);
    for (std::size_t k = 1; k < steps.size(); ++k) {
      if (steps[k - 1] < 1e-14) break;  // rounding floor
      EXPECT_LT(steps[k], steps[k - 1]) << "step " << k;
    }
  }
}

GTEST_TEST(ContinuationTest, ReferenceSystemConvergesEverywhere) {
  const SystemSpec s = testing::system2d(2.0);
  const RnviConfig cfg = default_config();
  const ContinuationResult res = run_continuation(s, cfg);
  ASSERT_EQ(res.records.size(), cfg.tau_grid.size());
  ASSERT_EQ(res.warm_start_chain.size(), cfg.tau_grid.size());
  EXPECT_FALSE(res.warm_start_chain[0]);
  const double C_A = drift_constant(s);
  for (std::size_t j = 0; j < res.records.size(); ++j) {
    const FixedPointRecord& r = res.records[j];
    EXPECT_EQ(r.tau, cfg.tau_grid[j]);
    if (j > 0) EXPECT_TRUE(res.warm_start_chain[j]);
    ASSERT_TRUE(r.converged) << r.tau;
    EXPECT_LE(r.residual, cfg.epsilon);
    EXPECT_NEAR(r.P.trace(), 1.0, 1e-10);
    EXPECT_GE(lambda_min(r.P), delta_tau(2, C_A, r.tau) - 1e-9);
    EXPECT_GT(r.gamma, 0.0);
    EXPECT_LE(r.gamma, (1 - r.tau) * C_A + r.tau);
    // Post-hoc residual through an independent operator call.
    const NormalizedStep step = hat_phi(s, r.P, r.tau);
    EXPECT_LE((step.P_next - r.P).frobenius_norm(), cfg.epsilon);
    EXPECT_EQ(step.trace_Y, r.gamma);
  }
}

GTEST_TEST(ContinuationTest, SingleStageMatchesSolveAtTau) {
  const SystemSpec s = testing::system2d(2.0);
  RnviConfig cfg;
  cfg.tau_grid = {0.5};
  const ContinuationResult res = run_continuation(s, cfg);
  ASSERT_EQ(res.records.size(), 1u);
  const FixedPointRecord direct = solve_at_tau(s, 0.5, 0.5 * SymMatrix::identity(2));
  EXPECT_EQ(res.records[0].P, direct.P);
  EXPECT_EQ(res.records[0].gamma, direct.gamma);
  EXPECT_EQ(res.records[0].inner_iters, direct.inner_iters);
}

GTEST_TEST(ContinuationTest, ScalarEveryStage) {
  const double a = 0.8, a_bar = 0.9, b = 0.4, b_bar = 1.1, sigma = 1.3;
  const SystemSpec s = testing::scalar_spec(a, a_bar, b, b_bar, sigma);
  const double g = testing::scalar_gamma(a, a_bar, b, b_bar, sigma);
  const ContinuationResult res = run_continuation(s, default_config());
  for (const FixedPointRecord& r : res.records) {
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.gamma, (1 - r.tau) * g + r.tau, 1e-14);
  }
}

GTEST_TEST(ContinuationTest, Deterministic) {
  const SystemSpec s = testing::system4d();
  const ContinuationResult a = run_continuation(s, default_config());
  const ContinuationResult b = run_continuation(s, default_config());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t j = 0; j < a.records.size(); ++j) {
    EXPECT_EQ(a.records[j].P, b.records[j].P);
    EXPECT_EQ(a.records[j].gamma, b.records[j].gamma);
    EXPECT_EQ(a.records[j].K, b.records[j].K);
    EXPECT_EQ(a.records[j].inner_iters, b.records[j].inner_iters);
  }
}

GTEST_TEST(ContinuationTest, Errors) {
  RnviConfig empty;
  EXPECT_THROW(run_continuation(testing::system2d(), empty), ConfigError);
  EXPECT_THROW(run_continuation(load_spec(testing::config_path("degenerate.json")),
                                default_config()),
               Degenerate);
}

GTEST_TEST(ContinuationTest, CustomStartingPoint) {
  RnviConfig cfg = default_config();
  cfg.P0 = SymMatrix::diagonal({0.9, 0.1});
  const ContinuationResult res = run_continuation(testing::system2d(), cfg);
  const ContinuationResult ref = run_continuation(testing::system2d(), default_config());
  EXPECT_NE(res.records[0].inner_iters, 0);
  EXPECT_NEAR(res.records.back().gamma, ref.records.back().gamma, 1e-10);
}

}  // namespace
}  // namespace msrate
