#include "mekan/tasks.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

using namespace mekan;
namespace fs = std::filesystem;

TEST(Regression, SincExamples) {
  EXPECT_EQ(sinc(0.0), 1.0);
  EXPECT_NEAR(sinc(1e-12), 1.0, 1e-15);
  EXPECT_NEAR(sinc(0.5), 2.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(sinc(0.5), 0.63662, 1e-5);
}

TEST(Regression, GeneratorsAreSeededAndInDomain) {
  const auto [tr, te] = gen_regression({RegressionTarget::Sinc1D, "", {}}, 50, 30, 5);
  EXPECT_EQ(tr.size(), 50);
  EXPECT_EQ(te.size(), 30);
  EXPECT_GE(tr.x.minCoeff(), kSincDomain.first);
  EXPECT_LE(tr.x.maxCoeff(), kSincDomain.second);
  for (Eigen::Index r = 0; r < tr.size(); ++r) EXPECT_EQ(tr.y(r, 0), sinc(tr.x(r, 0)));
  const auto again = gen_regression({RegressionTarget::Sinc1D, "", {}}, 50, 30, 5);
  EXPECT_EQ(again.first.x, tr.x);
  const auto two = gen_regression({RegressionTarget::Sines2D, "", {}}, 40, 10, 1);
  EXPECT_EQ(two.first.x.cols(), 2);
  EXPECT_GE(two.first.x.minCoeff(), 0.0);
  EXPECT_LE(two.first.x.maxCoeff(), 1.0);
  EXPECT_EQ(two.first.y(3, 0), sines_2d(two.first.x(3, 0), two.first.x(3, 1)));
}

TEST(Feynman, TableAndErrors) {
  EXPECT_EQ(feynman_equations().size(), 10u);
  const auto& eq = feynman_equation("I.16.6");
  EXPECT_EQ(eq.eval(std::vector<double>{0, 0}), 0.0);
  EXPECT_NEAR(eq.eval(std::vector<double>{0.5, 0.5}), 0.8, 1e-15);
  try {
    (void)feynman_equation("II.1.1");
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    for (const auto& q : feynman_equations()) EXPECT_NE(msg.find(q.id), std::string::npos);
  }
  RegressionSpec spec{RegressionTarget::Feynman, "I.9.18", {}};
  const auto [tr, te] = gen_regression(spec, 100, 10, 2);
  EXPECT_EQ(tr.x.cols(), 6);
}

TEST(Feynman, DimensionlessFormsMatchOriginals) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1.0, 5.0);
  auto f = [](const char* id, std::vector<double> v) { return feynman_equation(id).eval(v); };
  for (int n = 0; n < 100; ++n) {
    // I.16.6: (u + v)/(1 + uv/c^2) = c * f(u/c, v/c)
    {
      const double c = u(rng) * 3, uu = u(rng), vv = u(rng);
      EXPECT_NEAR((uu + vv) / (1 + uu * vv / (c * c)), c * f("I.16.6", {uu / c, vv / c}), 1e-10);
    }
    // I.12.11: q (Ef + B v sin t) = q Ef * f(Bv/Ef, t)
    {
      const double q = u(rng), ef = u(rng), B = u(rng), v = u(rng), t = u(rng);
      EXPECT_NEAR(q * (ef + B * v * std::sin(t)), q * ef * f("I.12.11", {B * v / ef, t}), 1e-10);
    }
    // I.13.12: G m1 m2 (1/r2 - 1/r1) = f(G m1 m2 / r2 ... ) with a = G m1 m2 / r1, b = r2 / r1.
    {
      const double G = u(rng), m1 = u(rng), m2 = u(rng), r1 = u(rng), r2 = u(rng);
      EXPECT_NEAR(G * m1 * m2 * (1 / r2 - 1 / r1), f("I.13.12", {G * m1 * m2 / r1, r2 / r1}), 1e-10);
    }
    // I.15.3x: (x - u t)/sqrt(1 - u^2/c^2) = x f(ut/x, u/c)
    {
      const double x = u(rng) * 4, uu = u(rng), t = u(rng) * 0.1, c = uu * 1.5;
      EXPECT_NEAR((x - uu * t) / std::sqrt(1 - uu * uu / (c * c)), x * f("I.15.3x", {uu * t / x, uu / c}), 1e-10);
    }
    // I.18.4: (m1 r1 + m2 r2)/(m1 + m2) = r1 f(m2/m1, r2/r1)
    {
      const double m1 = u(rng), m2 = u(rng), r1 = u(rng), r2 = u(rng);
      EXPECT_NEAR((m1 * r1 + m2 * r2) / (m1 + m2), r1 * f("I.18.4", {m2 / m1, r2 / r1}), 1e-10);
    }
    // I.27.6: 1/(1/d1 + n/d2) = d1 f(n, d1/d2)
    {
      const double n2 = u(rng), d1 = u(rng), d2 = u(rng);
      EXPECT_NEAR(1 / (n2 / d2 + 1 / d1), d1 * f("I.27.6", {n2, d1 / d2}), 1e-10);
    }
    // I.9.18: G m1 m2 / |r2 - r1|^2 with every length divided by x1.
    {
      const double G = u(rng), m1 = u(rng), m2 = u(rng);
      const double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng), z1 = u(rng), z2 = u(rng);
      const double orig =
          G * m1 * m2 / ((x2 - x1) * (x2 - x1) + (y2 - y1) * (y2 - y1) + (z2 - z1) * (z2 - z1));
      const double dim = f("I.9.18", {G * m1 * m2 / (x1 * x1), x2 / x1, y2 / x1, y1 / x1, z2 / x1, z1 / x1});
      EXPECT_NEAR(orig, dim, 1e-10 * std::max(1.0, std::abs(orig)));
    }
    // I.26.2: sin(theta1) = n sin(theta2)
    {
      const double n2 = u(rng) / 5.0, t2 = u(rng) / 5.0;
      EXPECT_NEAR(std::sin(f("I.26.2", {n2, t2})), n2 * std::sin(t2), 1e-10);
    }
  }
}

TEST(Ikeda, StepExamples) {
  EXPECT_EQ(ikeda_step({0, 0}), (State2{1, 0}));
  EXPECT_EQ(ikeda_step({0, 0}, {0.3}), (State2{1, 0}));
  EXPECT_EQ(ikeda_step({0.7, -2.1}, {0.0}), (State2{1, 0}));
  const double phi = 0.4 - 6.0 / (1 + 1 + 0);
  const State2 s = ikeda_step({1, 0}, {0.9});
  EXPECT_NEAR(s[0], 1 + 0.9 * std::cos(phi), 1e-15);
  EXPECT_NEAR(s[1], 0.9 * std::sin(phi), 1e-15);
}

TEST(Ikeda, DatasetConstruction) {
  IkedaDataOptions o;
  o.n_train = 1;
  o.n_test = 1;
  o.transient = 0;
  o.initial = State2{0, 0};
  const auto [tr, te] = ikeda_dataset(o);
  EXPECT_EQ(tr.x.row(0), (Matrix{{0, 0}}));
  EXPECT_EQ(tr.y.row(0), (Matrix{{1, 0}}));
  EXPECT_EQ(te.x.row(0), tr.y.row(0));

  o = {};
  o.n_train = 300;
  o.n_test = 100;
  o.seed = 3;
  const auto [a, b] = ikeda_dataset(o);
  for (Eigen::Index r = 0; r + 1 < a.size(); ++r) EXPECT_EQ(a.y.row(r), a.x.row(r + 1));
  EXPECT_EQ(b.x.row(0), a.y.row(a.size() - 1));
  const Matrix orbit = ikeda_trajectory({0.1, 0.2}, 100000);
  EXPECT_LE(orbit.cwiseAbs().maxCoeff(), 10.0);
}

TEST(Ecosystem, RhsExamples) {
  const State3 z = ecosystem_rhs({0.4, 0.3, 0.0});
  EXPECT_EQ(z[2], 0.0);
  EXPECT_EQ(ecosystem_rhs({0, 0, 0}), (State3{0, 0, 0}));
  const EcosystemParams p;
  const double N = 0.5, P = 0.3, Q = 0.8;
  const State3 d = ecosystem_rhs({N, P, Q});
  EXPECT_NEAR(d[0], N * (1 - N / p.K) - p.xp * p.yp * N * P / (N + p.N0), 1e-15);
  EXPECT_NEAR(d[1], p.xp * P * (p.yp * N / (N + p.N0) - 1) - p.xq * p.yq * P * Q / (P + p.P0), 1e-15);
  EXPECT_NEAR(d[2], p.xq * Q * (p.yq * P / (P + p.P0) - 1), 1e-15);
}

TEST(Rk4, ExponentialAndConvergence) {
  const Matrix still = integrate_rk4([](const Vector& x) { return Vector::Zero(x.size()); }, Vector{{1.0, 2.0}}, 0.1, 5);
  for (int r = 0; r <= 5; ++r) EXPECT_EQ(still.row(r), (Matrix{{1.0, 2.0}}));
  const Matrix e = integrate_rk4([](const Vector& x) { return x; }, Vector{{1.0}}, 0.01, 100);
  EXPECT_NEAR(e(100, 0), std::exp(1.0), 1e-8);

  const Vector x0{{0.7, 0.25, 0.8}};
  const double T = 2.0;
  auto end = [&](double dt) { return ecosystem_flow(x0, T, dt); };
  const Vector ref = end(0.0005);
  const double e1 = (end(0.05) - ref).norm();
  const double e2 = (end(0.025) - ref).norm();
  EXPECT_NEAR(e1 / e2, 16.0, 3.0);
  EXPECT_THROW(integrate_rk4([](const Vector& x) { return Vector(x.array().exp().exp()); }, Vector{{5.0}}, 1.0, 10),
               DataError);
}

TEST(Ecosystem, DatasetStaysOnAttractor) {
  EcosystemDataOptions o;
  o.n_train = 500;
  o.n_test = 200;
  o.seed = 4;
  const auto [tr, te] = ecosystem_dataset(o);
  EXPECT_GT(tr.x.col(2).minCoeff(), 0.05);
  for (Eigen::Index r = 0; r + 1 < tr.size(); ++r) EXPECT_EQ(tr.y.row(r), tr.x.row(r + 1));
  EXPECT_EQ(te.x.row(0), tr.y.row(tr.size() - 1));
  const Vector next = ecosystem_flow(tr.x.row(7).transpose(), o.dt_sample, o.dt);
  EXPECT_LE((next.transpose() - tr.y.row(7)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FivePeaks, Examples) {
  const auto& c = kDefaultPeakCenters;
  double expect = 1.0;
  for (std::size_t j = 0; j < 5; ++j)
    if (j != 2) expect += std::exp(-300.0 * (c[2] - c[j]) * (c[2] - c[j]));
  EXPECT_NEAR(five_peaks(c[2]), expect, 1e-15);
  EXPECT_NEAR(five_peaks(c[2]), 1.0000122884, 1e-9);
  EXPECT_LE(five_peaks(c[3] + 10), 1e-100);
  const auto phases = gen_five_peaks(100);
  ASSERT_EQ(phases.size(), 5u);
  int total = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    total += static_cast<int>(phases[i].size());
    EXPECT_NEAR(phases[i].x.minCoeff(), c[i] - 0.1, 1e-15);
    EXPECT_NEAR(phases[i].x.maxCoeff(), c[i] + 0.1, 1e-15);
  }
  EXPECT_EQ(total, 500);
  const Dataset full = five_peaks_full_domain(500);
  EXPECT_EQ(full.size(), 500);
  EXPECT_NEAR(full.x.minCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(full.x.maxCoeff(), 1.0, 1e-15);
}

namespace {

fs::path write_file(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("mekan_test_" + name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST(Csv, LoadAndSplit) {
  const auto p = write_file("four.csv", "a,b,t\n1,2,3\n4,5,6\n7,8,9\n10,11,12\n");
  const Dataset d = load_csv(p, "t");
  EXPECT_EQ(d.x.cols(), 2);
  EXPECT_EQ(d.y(2, 0), 9.0);
  const Dataset sel = load_csv(p, "a", {"t"});
  EXPECT_EQ(sel.x(1, 0), 6.0);
  EXPECT_EQ(sel.y(1, 0), 4.0);

  const auto [tr, te] = split(d, 2, 2, 7);
  std::set<double> seen;
  for (const Dataset* s : {&tr, &te})
    for (Eigen::Index r = 0; r < s->size(); ++r) seen.insert(s->y(r, 0));
  EXPECT_EQ(seen, (std::set<double>{3, 6, 9, 12}));
  const auto again = split(d, 2, 2, 7);
  EXPECT_EQ(again.first.x, tr.x);
  EXPECT_THROW(split(d, 3, 2, 0), DataError);
}

TEST(Csv, Errors) {
  EXPECT_THROW(load_csv(write_file("hdr.csv", "a,b\n"), "b"), DataError);
  try {
    (void)load_csv(write_file("bad.csv", "a,b\n1,2\n3,x\n"), "b");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_csv(write_file("missing.csv", "a,b\n1,\n"), "b"), DataError);
  EXPECT_THROW(load_csv(write_file("col.csv", "a,b\n1,2\n"), "zz"), DataError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", "b"), DataError);
}

TEST(Csv, WriteThenLoad) {
  Dataset d{Matrix{{0.1, 0.2}, {0.3, 0.4}}, Matrix{{1.0 / 3}, {2.0 / 7}}, "w", Split::Train};
  const fs::path p = fs::temp_directory_path() / "mekan_test_written.csv";
  write_csv(d, p, {"f0", "f1"}, {"y"});
  const Dataset back = load_csv(p, "y");
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
}
