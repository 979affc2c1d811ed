#include "mekan/trainer.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mekan;

namespace {

TrainConfig quick(const std::vector<int>& schedule, int steps, int iters, int heads) {
  TrainConfig cfg;
  cfg.grid_schedule = schedule;
  cfg.steps_per_stage = steps;
  cfg.iters_per_step = iters;
  cfg.loss.exit_weights = ExitWeights::uniform(heads);
  return cfg;
}

Dataset square_data(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset d{oracle::uniform_matrix(n, 1, -1, 1, rng), Matrix(n, 1), "square", Split::Train};
  d.y = d.x.array().square();
  return d;
}

// [2,2] Identity-base model with zero splines: head = x0 + x1 in both outputs.
MultiExitKan sum_model() {
  BuildOptions o;
  o.base_kind = BaseKind::Identity;
  o.init_sigma = 0.0;
  return build({{2, 2}}, false, o);
}

}  // namespace

TEST(Fit, ZeroStepsOnlyTransfersGrid) {
  auto m = build({{1, 2, 1}}, true);
  TrainConfig cfg = quick({3}, 0, 20, 2);
  cfg.update_grid = false;
  const auto r = fit(m, square_data(40, 1), cfg);
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_EQ(flatten_params(r.model), flatten_params(m));
  EXPECT_TRUE(r.stages[0].trace.records.empty());
}

TEST(Fit, StagesAreMonotoneUpToTransfer) {
  const Dataset d = square_data(200, 2);
  const TrainConfig cfg = quick({3, 5, 10}, 5, 10, 2);
  const auto r = fit(build({{1, 2, 1}}, true, {.seed = 3}), d, cfg);
  ASSERT_EQ(r.stages.size(), 3u);
  for (std::size_t s = 0; s < r.stages.size(); ++s) {
    const auto& st = r.stages[s];
    EXPECT_EQ(st.grid_size, cfg.grid_schedule[s]);
    EXPECT_LE(st.final_loss, st.loss_after_refit + 1e-12);
    double prev = st.loss_after_refit;
    for (const auto& rec : st.trace.records) {
      EXPECT_LE(rec.loss, prev + 1e-12);
      prev = rec.loss;
    }
    if (s > 0) EXPECT_LE(st.final_loss, r.stages[s - 1].final_loss + 1e-6);
  }
  EXPECT_LT(r.stages.back().final_loss, 1e-3);
}

TEST(Fit, RefinementTransferIsNearlyLossless) {
  const Dataset d = square_data(300, 4);
  TrainConfig cfg = quick({5, 10}, 5, 10, 1);
  cfg.update_grid = false;
  const auto r = fit(build({{1, 2, 1}}, false, {.grid_size = 5, .seed = 5}), d, cfg);
  // Nested uniform grids: the coarse spline lies in the fine space.
  const auto& s1 = r.stages[1];
  EXPECT_NEAR(s1.loss_after_refit, s1.loss_before_refit, 1e-9 + 1e-6 * s1.loss_before_refit);
  EXPECT_LE(s1.max_refit_residual, 1e-9);
}

TEST(Fit, LearnToExitKeepsWeightsOnSimplex) {
  TrainConfig cfg;
  cfg.grid_schedule = {3};
  cfg.steps_per_stage = 2;
  cfg.iters_per_step = 10;
  cfg.learn_to_exit = true;
  const auto r = fit(build({{1, 2, 2, 1}}, true), square_data(80, 6), cfg);
  ASSERT_TRUE(r.exit_weights.is_learnable());
  ASSERT_FALSE(r.stages[0].exit_weight_history.empty());
  for (const Vector& w : r.stages[0].exit_weight_history) {
    EXPECT_EQ(w.size(), 3);
    EXPECT_NEAR(w.sum(), 1.0, 1e-12);
    EXPECT_GE(w.minCoeff(), 0.0);
  }
}

TEST(Fit, SeededRunsAreBitIdentical) {
  const TrainConfig cfg = quick({3, 5}, 2, 10, 2);
  const Dataset d = square_data(100, 7);
  const auto a = fit(build({{1, 3, 1}}, true, {.seed = 1}), d, cfg);
  const auto b = fit(build({{1, 3, 1}}, true, {.seed = 1}), d, cfg);
  EXPECT_EQ(flatten_params(a.model), flatten_params(b.model));
}

TEST(Fit, RejectsBadConfigAndData) {
  TrainConfig cfg;
  cfg.grid_schedule = {5, 3};
  EXPECT_THROW(fit(build({{1, 1}}, false), square_data(10, 1), cfg), ConfigError);
  cfg = {};
  cfg.loss.exit_weights = ExitWeights::fixed({1, 2});
  EXPECT_THROW(fit(build({{1, 2, 2, 1}}, true), square_data(10, 1), cfg), ConfigError);
  EXPECT_THROW(fit(build({{2, 1}}, false), square_data(10, 1), TrainConfig{}), DataError);
}

TEST(Evaluate, Examples) {
  const auto m = sum_model();
  Dataset d{Matrix{{0.1, 0.2}, {0.3, -0.4}, {0.5, 0.0}}, Matrix(3, 2), "", Split::Test};
  for (int r = 0; r < 3; ++r) d.y.row(r).setConstant(d.x(r, 0) + d.x(r, 1));
  auto e = evaluate(m, d);
  EXPECT_NEAR(e.rmse[0], 0.0, 1e-15);
  EXPECT_NEAR(e.r2[0], 1.0, 1e-15);

  // Predicting the mean gives R^2 = 0.
  BuildOptions z;
  z.base_kind = BaseKind::Zero;
  z.init_sigma = 0.0;
  const auto zero = build({{1, 1}}, false, z);
  Dataset c{Matrix{{0.0}, {0.0}}, Matrix{{-1.0}, {1.0}}, "", Split::Test};
  e = evaluate(zero, c);
  EXPECT_NEAR(e.r2[0], 0.0, 1e-15);
  EXPECT_NEAR(e.rmse[0], 1.0, 1e-15);

  Dataset flat{Matrix{{0.2}, {0.7}}, Matrix{{3.0}, {3.0}}, "", Split::Test};
  e = evaluate(zero, flat);
  EXPECT_FALSE(e.r2_defined);
  EXPECT_TRUE(std::isnan(e.r2[0]));
  EXPECT_NEAR(e.rmse[0], 3.0, 1e-15);
}

TEST(Evaluate, MatchesLoopOracleAndPicksSmallestTie) {
  std::mt19937_64 rng(9);
  const auto m = build({{2, 3, 2, 2}}, true, {.init_sigma = 0.5, .seed = 9});
  Dataset d{oracle::uniform_matrix(31, 2, -1, 1, rng), oracle::uniform_matrix(31, 2, -1, 1, rng), "", Split::Test};
  const auto e = evaluate(m, d);
  double mean[2] = {d.y.col(0).mean(), d.y.col(1).mean()};
  double sst = 0.0;
  for (int r = 0; r < 31; ++r)
    for (int c = 0; c < 2; ++c) sst += (d.y(r, c) - mean[c]) * (d.y(r, c) - mean[c]);
  int best = 0;
  for (int k = 0; k < m.num_heads(); ++k) {
    double sse = 0.0;
    for (int r = 0; r < 31; ++r) {
      const auto h = oracle::heads(m, {d.x(r, 0), d.x(r, 1)})[static_cast<std::size_t>(k)];
      for (int c = 0; c < 2; ++c) sse += (d.y(r, c) - h[c]) * (d.y(r, c) - h[c]);
    }
    EXPECT_NEAR(e.rmse[static_cast<std::size_t>(k)], std::sqrt(sse / 62.0), 1e-12);
    EXPECT_NEAR(e.r2[static_cast<std::size_t>(k)], 1 - sse / sst, 1e-12);
    if (e.rmse[static_cast<std::size_t>(k)] < e.rmse[static_cast<std::size_t>(best)]) best = k;
  }
  EXPECT_EQ(e.best_exit, best);

  BuildOptions z;
  z.base_kind = BaseKind::Zero;
  z.init_sigma = 0.0;
  const auto zeros = build({{1, 1, 1, 1}}, true, z);
  const auto tie = evaluate(zeros, Dataset{Matrix{{0.3}}, Matrix{{1.0}}, "", Split::Test});
  EXPECT_EQ(tie.best_exit, 0);
}

TEST(Rollout, ExamplesAndDivergence) {
  const auto m = sum_model();
  const auto r = rollout(m, Vector{{1.0, 0.0}}, 3);
  ASSERT_EQ(r.trajectory.rows(), 3);
  EXPECT_EQ(r.trajectory.row(0), (Matrix{{1.0, 1.0}}));
  EXPECT_EQ(r.trajectory.row(1), (Matrix{{2.0, 2.0}}));
  EXPECT_EQ(r.trajectory.row(2), (Matrix{{4.0, 4.0}}));
  EXPECT_EQ(rollout(m, Vector{{1.0, 0.0}}, 0).trajectory.rows(), 0);
  EXPECT_THROW(rollout(build({{2, 1}}, false), Vector::Zero(2), 3), DataError);
  EXPECT_THROW(rollout(m, Vector::Zero(3), 3), DataError);

  // Ikeda truth from (0,0) starts at (1,0); an identity-free sum model stays at 0.
  BuildOptions z;
  z.base_kind = BaseKind::Zero;
  z.init_sigma = 0.0;
  const auto still = build({{2, 2}}, false, z);
  const Matrix pred = rollout(still, Vector::Zero(2), 10).trajectory;
  const Matrix truth = ikeda_trajectory({0.0, 0.0}, 10);
  EXPECT_EQ(divergence_time(pred, truth, 0.2), 1);
  EXPECT_EQ(divergence_time(truth, truth, 0.2), 10);
  EXPECT_EQ(divergence_time(truth.topRows(4), truth, 0.2), 5);
  Matrix late = truth;
  late(6, 1) += 0.5;
  EXPECT_EQ(divergence_time(late, truth, 0.2), 7);
  EXPECT_EQ(divergence_time(Matrix(0, 2), Matrix(0, 2), 0.2), 0);
}

TEST(Rollout, TracksIkedaTruthWithExactMap) {
  // Reference trajectory checked against a hand-iterated loop.
  State2 s{0.1, -0.2};
  const Matrix t = ikeda_trajectory(s, 50);
  for (int k = 0; k < 50; ++k) {
    const double x = s[0], y = s[1];
    const double phi = 0.4 - 6.0 / (1 + x * x + y * y);
    s = {1 + 0.9 * (x * std::cos(phi) - y * std::sin(phi)), 0.9 * (x * std::sin(phi) + y * std::cos(phi))};
    EXPECT_NEAR(t(k, 0), s[0], 1e-9);
    EXPECT_NEAR(t(k, 1), s[1], 1e-9);
  }
}

TEST(Continual, SinglePhaseAndReports) {
  const auto phases = gen_five_peaks(20);
  const Dataset full = five_peaks_full_domain(50);
  TrainConfig cfg = quick({10}, 1, 5, 2);
  cfg.update_grid = false;
  BuildOptions o;
  o.grid_size = 10;
  o.grid_lo = 0.0;
  const auto r = fit_continual(build({{1, 3, 1}}, true, o), {phases[0]}, full, cfg);
  ASSERT_EQ(r.per_phase.size(), 1u);
  EXPECT_EQ(r.per_phase[0].rmse.size(), 2u);
  EXPECT_EQ(r.phases[0].grid_size, 10);
  EXPECT_EQ(r.model.trunk[0].acts[0].grid.num_intervals(), 10);
  EXPECT_THROW(fit_continual(build({{1, 1}}, false), {}, full, cfg), DataError);
}
