// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rkcs/dynamics.hpp"

using namespace rkcs;

namespace {

std::vector<double> random_vec(std::size_t m, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(m);
  for (double& e : v) e = g(rng);
  return v;
}

SimConfig config(double c, double beta, double dt, double t_end, double kappa = 1.0) {
  SimConfig cfg;
  cfg.c = LightSpeed(c);
  cfg.beta = beta;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.kappa = kappa;
  return cfg;
}

}  // namespace

TEST(PairwiseForce, MatchesDirectDoubleLoop) {
  ThreadPool pool(1);
  PairwiseForce f;
  for (std::size_t d : {1u, 2u, 3u, 5u}) {
    for (std::size_t n : {1u, 2u, 7u, 64u, 65u, 200u}) {
      for (double beta : {0.0, 0.25, 1.7}) {
        const auto x = random_vec(n * d, 10 * n + d, 2.0);
        const auto v = random_vec(n * d, 10 * n + d + 1, 0.5);
        std::vector<double> a(n * d);
        f.compute(x, v, n, d, beta, 0.8, a, pool);
        const auto ref = oracle::direct_force(x, v, n, d, beta, 0.8);
        for (std::size_t k = 0; k < a.size(); ++k) {
          EXPECT_NEAR(a[k], ref[k], 1e-13) << "n=" << n << " d=" << d << " beta=" << beta;
        }
      }
    }
  }
}

TEST(PairwiseForce, SumsToZero) {
  ThreadPool pool(1);
  PairwiseForce f;
  const std::size_t n = 300, d = 2;
  const auto x = random_vec(n * d, 1, 3.0);
  const auto v = random_vec(n * d, 2, 1.0);
  std::vector<double> a(n * d);
  f.compute(x, v, n, d, 0.5, 1.0, a, pool);
  for (std::size_t k = 0; k < d; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i * d + k];
    EXPECT_NEAR(s, 0.0, 1e-13);
  }
}

TEST(PairwiseForce, IndependentOfThreadCount) {
  const std::size_t n = 777, d = 3;
  const auto x = random_vec(n * d, 5, 2.0);
  const auto v = random_vec(n * d, 6, 1.0);
  std::vector<double> a1(n * d), a4(n * d), a7(n * d);
  ThreadPool p1(1), p4(4), p7(7);
  PairwiseForce f;
  f.compute(x, v, n, d, 0.3, 1.0, a1, p1);
  f.compute(x, v, n, d, 0.3, 1.0, a4, p4);
  f.compute(x, v, n, d, 0.3, 1.0, a7, p7);
  EXPECT_EQ(a1, a4);
  EXPECT_EQ(a1, a7);
}

TEST(PairwiseForce, RejectsMismatchedSizes) {
  ThreadPool pool(1);
  PairwiseForce f;
  std::vector<double> x(6), v(4), a(6);
  EXPECT_THROW(f.compute(x, v, 3, 2, 0.0, 1.0, a, pool), PreconditionError);
}

TEST(Rk4, TwoParticleClassicalContraction) {
  // N = 2, beta = 0: d(w1 - w2)/dt = -kappa (w1 - w2).
  for (double kappa : {0.5, 1.0, 2.0}) {
    Ensemble e(2, 2);
    e.w(0)[0] = 1.0;
    e.w(0)[1] = -0.5;
    e.w(1)[0] = -0.3;
    e.w(1)[1] = 0.2;
    const auto cfg = config(1.0, 0.0, 1e-3, 3.0, kappa);
    const auto r = simulate_classical(e, cfg);
    ASSERT_FALSE(r.failure);
    for (int k = 0; k < 2; ++k) {
      const double d0 = e.w(0)[k] - e.w(1)[k];
      const double dT = r.final_state.w(0)[k] - r.final_state.w(1)[k];
      EXPECT_NEAR(dT, d0 * std::exp(-kappa * 3.0), 1e-10);
    }
  }
}

TEST(Rk4, FreeStreamingWhenKappaIsZero) {
  const auto e0 = sample_ensemble(GaussianSpec{}, GaussianSpec{{}, {2.0}}, 50, 3, 4);
  const auto cfg = config(1.0, 0.5, 0.1, 5.0, 0.0);
  const auto r = integrate(e0, cfg, relativistic_map(cfg), {});
  ASSERT_FALSE(r.failure);
  for (std::size_t i = 0; i < e0.size(); ++i) {
    const auto v = momentum_to_velocity(e0.w(i), cfg.c);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(r.final_state.w(i)[k], e0.w(i)[k]);
      EXPECT_NEAR(r.final_state.x(i)[k], e0.x(i)[k] + 5.0 * v[k], 1e-12);
    }
  }
}

TEST(Rk4, FourthOrderConvergence) {
  const auto e0 = sample_ensemble(GaussianSpec{}, GaussianSpec{{}, {0.8}}, 16, 2, 8);
  auto run = [&](double dt) { return integrate(e0, config(1.0, 0.5, dt, 1.0), RelativisticVelocity{LightSpeed(1.0)}, {}).final_state; };
  const auto ref = run(1e-3);
  auto err = [&](const Ensemble& e) {
    double m = 0.0;
    for (std::size_t k = 0; k < e.momenta().size(); ++k) {
      m = std::max(m, std::abs(e.momenta()[k] - ref.momenta()[k]));
      m = std::max(m, std::abs(e.positions()[k] - ref.positions()[k]));
    }
    return m;
  };
  const double e1 = err(run(0.1)), e2 = err(run(0.05));
  const double order = std::log2(e1 / e2);
  EXPECT_GT(order, 3.7);
  EXPECT_LT(order, 4.3);
}

TEST(Rk4, ConservesMeanMomentum) {
  const auto e0 = sample_ensemble(GaussianSpec{}, GaussianSpec{{0.3, -0.1}, {0.5}}, 100, 2, 12);
  const auto cfg = config(1.0, 0.5, 0.01, 2.0);
  const auto r = integrate(e0, cfg, relativistic_map(cfg), {});
  for (std::size_t k = 0; k < 2; ++k) {
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      s0 += e0.w(i)[k];
      s1 += r.final_state.w(i)[k];
    }
    EXPECT_NEAR(s1 / 100, s0 / 100, 1e-13);
  }
}

TEST(Rk4, RelativisticApproachesClassicalAsCGrows) {
  const auto e0 = sample_ensemble(GaussianSpec{}, GaussianSpec{{}, {0.5}}, 32, 2, 21);
  auto cfg = config(1.0, 0.5, 0.01, 1.0);
  const auto cl = simulate_classical(e0, cfg).final_state;
  double prev = std::numeric_limits<double>::infinity();
  for (double c : {10.0, 100.0, 1000.0}) {
    cfg.c = LightSpeed(c);
    const auto rel = integrate(e0, cfg, relativistic_map(cfg), {}).final_state;
    double m = 0.0;
    for (std::size_t k = 0; k < rel.momenta().size(); ++k) m = std::max(m, std::abs(rel.positions()[k] - cl.positions()[k]));
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(Integrate, RecordSchedule) {
  const auto e0 = sample_ensemble(GaussianSpec{}, GaussianSpec{}, 4, 1, 1);
  auto cfg = config(2.0, 0.0, 0.1, 1.0);
  cfg.record_every = 3;
  std::vector<std::size_t> steps;
  std::vector<double> times;
  integrate(e0, cfg, relativistic_map(cfg), [&](std::size_t s, double t, const Ensemble&) {
    steps.push_back(s);
    times.push_back(t);
  });
  EXPECT_EQ(steps, (std::vector<std::size_t>{0, 3, 6, 9, 10}));
  EXPECT_NEAR(times.back(), 1.0, 1e-15);
}

TEST(Integrate, ZeroHorizonRecordsOnlyInitialState) {
  const auto e0 = sample_ensemble(GaussianSpec{}, GaussianSpec{}, 4, 1, 1);
  const auto cfg = config(2.0, 0.0, 0.1, 0.0);
  int calls = 0;
  const auto r = integrate(e0, cfg, relativistic_map(cfg), [&](std::size_t, double, const Ensemble&) { ++calls; });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(r.final_state, e0);
}

TEST(Integrate, NonFiniteMomentumIsReportedWithAtom) {
  Ensemble e(3, 2);
  e.w(1)[0] = std::numeric_limits<double>::infinity();
  const auto cfg = config(1.0, 0.0, 0.1, 1.0);
  const auto r = integrate(e, cfg, relativistic_map(cfg), {});
  ASSERT_TRUE(r.failure);
  EXPECT_EQ(r.failure->atom, 1u);
  EXPECT_EQ(r.failure->t, 0.0);
  EXPECT_EQ(r.final_state, e);
}

TEST(SimConfig, Validation) {
  EXPECT_NO_THROW(config(1.0, 0.5, 0.01, 1.0).validate());
  EXPECT_THROW(config(1.0, -0.5, 0.01, 1.0).validate(), ConfigError);
  EXPECT_THROW(config(1.0, 0.5, 0.0, 1.0).validate(), ConfigError);
  EXPECT_THROW(config(1.0, 0.5, 0.01, 0.005).validate(), ConfigError);
  EXPECT_THROW(config(1.0, 0.5, 0.3, 1.0).validate(), ConfigError);
  auto c = config(1.0, 0.5, 0.01, 1.0);
  c.record_every = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(config(1.0, 0.5, 0.01, 200.0).step_count(), 20000u);
  EXPECT_DOUBLE_EQ(default_dt(4.0), 2.5e-3);
  EXPECT_DOUBLE_EQ(default_dt(0.5), 1e-2);
}

TEST(Simulate, RowsCarryInitialMoments) {
  const auto e0 = sample_ensemble(GaussianSpec{}, GaussianSpec{{}, {0.3}}, 64, 2, 2);
  GaugeParams g;
  g.gauge = GaugePolynomial{3.0, 1.5, 2.0, 0.05};
  g.D = 4;
  const auto cfg = config(1.0, 0.5, 0.01, 0.5);
  const auto r = simulate(e0, cfg, g);
  ASSERT_FALSE(r.failure);
  EXPECT_EQ(r.rows.size(), 51u);
  EXPECT_NEAR(r.gauges.moment_p0, empirical_moment_p(e0, 4.0), 1e-15);
  EXPECT_TRUE(std::isnan(r.gauges.moment_e0));
  EXPECT_EQ(r.rows.front().t, 0.0);
  EXPECT_EQ(r.rows.front().wc_dev, 0.0);
}
