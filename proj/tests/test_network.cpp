#include "mekan/network.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mekan;

namespace {

BuildOptions opts(std::uint64_t seed, BaseKind kind = BaseKind::SiLU, int grid = 5, double sigma = 0.3) {
  BuildOptions o;
  o.seed = seed;
  o.base_kind = kind;
  o.grid_size = grid;
  o.init_sigma = sigma;
  return o;
}

}  // namespace

TEST(Build, CountsFromExamples) {
  const auto single = build({{2, 3, 2, 1}}, false);
  EXPECT_EQ(single.num_heads(), 1);
  EXPECT_EQ(count_activations(single), 14u);
  const auto multi = build({{2, 3, 2, 1}}, true);
  EXPECT_EQ(multi.num_heads(), 3);
  EXPECT_EQ(count_activations(multi), 19u);
  for (bool m : {false, true}) {
    const auto tiny = build({{1, 1}}, m);
    EXPECT_EQ(tiny.num_heads(), 1);
    EXPECT_EQ(count_activations(tiny), 1u);
  }
  const auto cube = build({{3, 3, 3, 3}}, true);
  EXPECT_EQ(count_activations(cube), 45u);
  EXPECT_EQ(count_activations(cube), oracle::enumerate_activations(cube));
  EXPECT_EQ(count_parameters(cube), 45u * (3 + 3));
  EXPECT_THROW(build({{3}}, false), ShapeError);
  EXPECT_THROW(build({{3, 0, 1}}, false), ShapeError);
}

TEST(Build, UniformWidthClosedForms) {
  for (int d = 1; d <= 4; ++d)
    for (int m = 1; m <= 3; ++m)
      for (int L = 2; L <= 5; ++L) {
        std::vector<int> w(static_cast<std::size_t>(L), d);
        w.push_back(m);
        const auto s = build({w}, false);
        const auto mm = build({w}, true);
        const std::size_t single = static_cast<std::size_t>((L - 1) * d * d + d * m);
        EXPECT_EQ(count_activations(s), single);
        EXPECT_EQ(count_activations(mm) - count_activations(s), static_cast<std::size_t>((L - 1) * d * m));
      }
}

TEST(Build, ExitWidthsAndSeededInit) {
  const auto a = build({{2, 4, 3, 2}}, true, opts(7));
  ASSERT_EQ(a.exits.size(), 2u);
  EXPECT_EQ(a.exits[0].in_width, 2);
  EXPECT_EQ(a.exits[1].in_width, 4);
  for (const auto& e : a.exits) EXPECT_EQ(e.out_width, 2);
  const auto b = build({{2, 4, 3, 2}}, true, opts(7));
  EXPECT_EQ(flatten_params(a), flatten_params(b));
  const auto c = build({{2, 4, 3, 2}}, true, opts(8));
  EXPECT_NE(flatten_params(a), flatten_params(c));
}

TEST(Forward, ZeroAndIdentityNetworks) {
  auto zero = build({{2, 3, 2}}, true, opts(1, BaseKind::Zero, 3, 0.0));
  const Matrix x = Matrix::Random(5, 2);
  for (const auto& h : forward(zero, x)) EXPECT_TRUE(h.isZero(0.0));
  auto id = build({{1, 1}}, false, opts(1, BaseKind::Identity, 3, 0.0));
  const auto out = forward(id, Matrix::Constant(1, 1, 2.0));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0](0, 0), 2.0);
}

TEST(Forward, MatchesNestedLoopOracle) {
  std::mt19937_64 rng(3);
  for (const std::vector<int>& w : {std::vector<int>{2, 2, 1}, {2, 3, 2, 1}, {3, 3, 3, 3}}) {
    const auto m = build({w}, true, opts(rng()));
    const Matrix x = oracle::uniform_matrix(17, w.front(), -1.3, 1.3, rng);
    const auto heads = forward(m, x);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const auto o = oracle::heads(m, std::vector<double>(x.row(r).data(), x.row(r).data() + x.cols()));
      for (std::size_t k = 0; k < heads.size(); ++k)
        for (Eigen::Index c = 0; c < heads[k].cols(); ++c) EXPECT_NEAR(heads[k](r, c), o[k][c], 1e-12);
    }
  }
}

TEST(Forward, BatchEqualsRowByRowAndSerial) {
  std::mt19937_64 rng(4);
  const auto m = build({{3, 4, 4, 2}}, true, opts(5));
  const Matrix x = oracle::uniform_matrix(300, 3, -1, 1, rng);
  const auto batch = forward(m, x);
  const auto serial = forward_serial(m, x);
  for (std::size_t k = 0; k < batch.size(); ++k) EXPECT_EQ(batch[k], serial[k]);
  for (Eigen::Index r = 0; r < x.rows(); r += 37) {
    const auto one = forward(m, x.row(r));
    for (std::size_t k = 0; k < batch.size(); ++k) EXPECT_EQ(one[k].row(0), batch[k].row(r));
  }
}

TEST(Forward, RejectsBadInput) {
  const auto m = build({{2, 1}}, false);
  EXPECT_THROW(forward(m, Matrix::Zero(3, 3)), DataError);
  Matrix x = Matrix::Zero(2, 2);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(forward(m, x), DataError);
  x(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(forward(m, x), DataError);
}

TEST(Params, RoundTripAndGuard) {
  auto m = build({{2, 3, 2, 1}}, true, opts(2));
  const Matrix x = Matrix::Random(9, 2);
  const auto before = forward(m, x);
  const Vector p = flatten_params(m);
  EXPECT_EQ(static_cast<std::size_t>(p.size()), count_parameters(m));
  load_params(m, p);
  const auto after = forward(m, x);
  for (std::size_t k = 0; k < before.size(); ++k) EXPECT_EQ(before[k], after[k]);
  EXPECT_THROW(load_params(m, Vector::Zero(p.size() - 1)), ShapeError);
  EXPECT_THROW(load_params(m, Vector::Zero(p.size() + 1)), ShapeError);
}

TEST(Params, OrderingIsTrunkThenExitsRowMajor) {
  auto m = build({{2, 3, 1}}, true, opts(2));
  Vector p = flatten_params(m);
  const int nb = m.trunk[0].acts[0].grid.basis_count();
  // First coefficient of trunk layer 1, activation (0, 2).
  const Eigen::Index at = static_cast<Eigen::Index>((2 * 3 + 2) * nb);
  p(at) = 42.0;
  load_params(m, p);
  EXPECT_EQ(m.trunk[1].at(0, 2).coeffs[0], 42.0);
  // First exit coefficient follows the whole trunk.
  p = flatten_params(m);
  p(static_cast<Eigen::Index>((6 + 3) * nb)) = -7.0;
  load_params(m, p);
  EXPECT_EQ(m.exits[0].at(0, 0).coeffs[0], -7.0);
}

TEST(Topology, PerturbationReachesOnlyDownstreamExits) {
  std::mt19937_64 rng(8);
  const auto base = build({{2, 3, 3, 2, 1}}, true, opts(9, BaseKind::SiLU, 3, 0.5));
  const Matrix x = oracle::uniform_matrix(50, 2, -1, 1, rng);
  const auto ref = forward(base, x);
  const int K = base.num_heads();

  std::vector<ActivationSite> sites;
  for_each_activation(base, [&](const ActivationSite& s, const SplineActivation&) { sites.push_back(s); });
  for (const auto& site : sites) {
    MultiExitKan m = base;
    for_each_activation(m, [&](const ActivationSite& s, SplineActivation& a) {
      if (s.is_exit == site.is_exit && s.layer == site.layer && s.j == site.j && s.i == site.i)
        for (auto& c : a.coeffs) c += 0.25;
    });
    const auto out = forward(m, x);
    for (int k = 0; k < K; ++k) {
      const bool changed = out[static_cast<std::size_t>(k)] != ref[static_cast<std::size_t>(k)];
      const bool expected = site.is_exit ? k == site.layer : (k == K - 1 || k > site.layer);
      EXPECT_EQ(changed, expected) << (site.is_exit ? "exit " : "trunk ") << site.layer << " head " << k;
    }
  }
}

TEST(Topology, SingleAndMultiShareFinalHead) {
  const auto multi = build({{2, 3, 2, 1}}, true, opts(4));
  MultiExitKan single = multi;
  single.multi_exit = false;
  single.exits.clear();
  const Matrix x = Matrix::Random(20, 2);
  EXPECT_EQ(forward(multi, x).back(), forward(single, x).back());
}
