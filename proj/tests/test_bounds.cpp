// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rkcs/bounds.hpp"

using namespace rkcs;

namespace {

GaugeParams poly(double gamma_p, double delta_p, double D = 8.0, double l1 = 2.0) {
  GaugeParams g;
  g.gauge = GaugePolynomial{2.0, gamma_p, 2.0, delta_p};
  g.D = D;
  g.l1 = l1;
  return g;
}

GaugeParams expo(double gamma_e, double delta_e, double alpha = 1.0) {
  GaugeParams g;
  g.gauge = GaugeExponential{2.0, gamma_e, 2.0, delta_e};
  g.alpha = alpha;
  return g;
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST(Theorem31Exponent, ReferenceParameterSet) {
  EXPECT_NEAR(theorem31_exponent(poly(1.5, 0.05)), 0.35, 1e-15);
  // The second branch binds when gamma_p is close to 1.
  EXPECT_NEAR(theorem31_exponent(poly(1.01, 0.2)), 0.04, 1e-14);
  EXPECT_FALSE(cohesion_admissible(poly(1.5, 0.05)));
  EXPECT_TRUE(cohesion_admissible(poly(2.0, 0.3, 20.0, 2.0)));
}

TEST(Theorem31Exponent, RejectsBadInput) {
  EXPECT_THROW(theorem31_exponent(expo(2.0, 0.2)), ConfigError);
  EXPECT_THROW(theorem31_exponent(poly(1.5, 0.05, 3.0, 2.0)), ConfigError);
  EXPECT_THROW(theorem31_exponent(poly(1.5, 0.05, 8.0, 1.0)), ConfigError);
}

TEST(CheckParams, PolynomialViolationsAreNamed) {
  EXPECT_TRUE(check_params(poly(1.5, 0.05), 0.25, 1.0).empty());
  auto bad = check_params(poly(1.5, 0.3), 0.25, 1.0);
  EXPECT_TRUE(has(bad, "0 < delta_p < (1 - beta gamma_p)/3"));
  bad = check_params(poly(1.5, 0.05), 0.8, 1.0);
  EXPECT_TRUE(has(bad, "beta gamma_p < 1"));
  bad = check_params(poly(1.5, 0.05, 3.0, 2.0), 0.25, 1.0);
  EXPECT_TRUE(has(bad, "D >= 2 l1"));
  bad = check_params(poly(1.5, 0.05), 1.0, 1.0);
  EXPECT_TRUE(has(bad, "0 <= beta < 1"));
}

TEST(CheckParams, ExponentialViolationsAreNamed) {
  EXPECT_TRUE(check_params(expo(2.0, 0.2), 0.25, 1.0).empty());
  EXPECT_TRUE(has(check_params(expo(2.0, 0.2), 0.25, 3.0), "gamma_e > c"));
  EXPECT_TRUE(has(check_params(expo(2.0, 0.3), 0.25, 1.0), "0 < delta_e < (1 - beta)/3"));
}

TEST(GronwallBound, ConstantCoefficientsClosedForm) {
  const double p = 0.7, q = 0.3, y0 = 2.0;
  for (double t : {0.5, 1.0, 5.0, 10.0}) {
    const double expect = y0 * std::exp(-p * t) + std::exp(-p * t / 2) * q * t / 2 + q * (1 - std::exp(-p * t / 2)) / p;
    const double got = gronwall_bound(y0, [&](double) { return p; }, [&](double) { return q; }, t, 1e-3);
    EXPECT_NEAR(got, expect, 1e-12);
  }
  EXPECT_EQ(gronwall_bound(y0, [](double) { return 1.0; }, [](double) { return 1.0; }, 0.0, 0.1), y0);
}

TEST(GronwallBound, DominatesOdeSolutionForMonotoneCoefficients) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double p0 = 0.1 + 2.0 * u(rng), pa = 2.0 * u(rng);
    const double q0 = 2.0 * u(rng), qa = 0.5 + u(rng);
    const double y0 = 3.0 * u(rng);
    auto p = [=](double t) { return p0 / std::pow(1.0 + t, pa); };
    auto q = [=](double t) { return q0 * std::exp(-qa * t); };
    const std::vector<double> at{1.0, 5.0, 10.0};
    const auto ref = oracle::rk4_scalar([&](double t, double y) { return -p(t) * y + q(t); }, y0, 1e-3, at);
    for (std::size_t i = 0; i < at.size(); ++i) {
      EXPECT_LE(ref[i], gronwall_bound(y0, p, q, at[i], 1e-3) + 1e-8);
    }
  }
}

TEST(GronwallBound, RejectsNegativeInputs) {
  EXPECT_THROW(gronwall_bound(1.0, [](double) { return -1.0; }, [](double) { return 1.0; }, 1.0, 0.1),
               PreconditionError);
  EXPECT_THROW(gronwall_bound(1.0, [](double) { return 1.0; }, [](double) { return 1.0; }, -1.0, 0.1),
               PreconditionError);
  EXPECT_THROW(gronwall_bound(1.0, [](double) { return 1.0; }, [](double) { return 1.0; }, 1.0, 0.0),
               PreconditionError);
}

TEST(TailBounds, PolynomialFormulas) {
  auto g = poly(1.5, 0.05, 4.0);
  g.moment_p0 = 5.0;
  const LightSpeed c(1.0);
  const double rw = 2.0 * std::pow(3.0, 0.05), rx = 2.0 * std::pow(3.0, 1.5);
  EXPECT_NEAR(tail_bound(2.0, g, c, TailSide::w), 5.0 / std::pow(rw, 4.0), 1e-14);
  EXPECT_NEAR(tail_bound(2.0, g, c, TailSide::x), 8.0 * 5.0 * std::pow(3.0 / rx, 4.0), 1e-13);
  GaugeParams bare = poly(1.5, 0.05);
  EXPECT_THROW(tail_bound(1.0, bare, c, TailSide::w), PreconditionError);
}

TEST(TailBounds, ExponentialFormulas) {
  auto g = expo(3.0, 0.2, 0.5);
  g.moment_e0 = 4.0;
  const LightSpeed c(1.0);
  EXPECT_NEAR(tail_bound(1.0, g, c, TailSide::w), 4.0 * std::exp(-0.5 * 2.0 * std::pow(2.0, 0.2)), 1e-14);
  EXPECT_NEAR(tail_bound(1.0, g, c, TailSide::x), 4.0 * std::exp(0.5 * (1.0 - 5.0)), 1e-14);
}

TEST(TailBounds, MarkovInequalityOnSamples) {
  // The momentum bound is Markov's inequality at t = 0 for any sample set.
  std::mt19937_64 rng(4);
  std::student_t_distribution<double> st(10.0);
  std::vector<double> w(5000);
  double m = 0.0;
  for (double& x : w) {
    x = std::abs(st(rng));
    m += std::pow(x, 4.0) / w.size();
  }
  auto g = poly(1.5, 0.05, 4.0);
  g.moment_p0 = m;
  for (double r0 : {0.5, 1.0, 2.0, 3.0}) {
    g.gauge = GaugePolynomial{2.0, 1.5, r0, 0.05};
    const double frac = std::count_if(w.begin(), w.end(), [&](double x) { return x >= r0; }) / 5000.0;
    EXPECT_LE(frac, tail_bound(0.0, g, LightSpeed(1.0), TailSide::w));
  }
}

TEST(Envelope, RecoversDecayOfExactShape) {
  const auto g = expo(2.0, 0.2, 1.0);
  const double beta = 0.25;
  std::vector<double> t, L;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(k);
    L.push_back(theorem32_envelope(k, g, beta, {0.05, 0.3}));
  }
  const auto fit = fit_envelope(t, L, g, beta, default_c9_grid());
  EXPECT_TRUE(fit.within_cap);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_GE(theorem32_envelope(t[i], g, beta, fit.constants) * (1 + 1e-12), L[i]);
  }
  EXPECT_GE(fit.constants.c9, 0.05 * 0.9);
}

TEST(Envelope, DominatesEveryRowWithoutSlack) {
  const auto g = expo(2.0, 0.2, 1.0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  for (int rep = 0; rep < 400; ++rep) {
    std::vector<double> t, L;
    for (int k = 0; k <= 100; ++k) {
      t.push_back(k);
      L.push_back(jitter(rng) * std::exp(-0.7 * std::pow(static_cast<double>(k), 0.97)));
    }
    const auto grids = rep % 20 == 0 ? std::vector<std::vector<double>>{default_c9_grid(), {100.0}}
                                     : std::vector<std::vector<double>>{{100.0}};
    for (const auto& grid : grids) {
      const auto fit = fit_envelope(t, L, g, 0.25, grid);
      for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_LE(L[i], theorem32_envelope(t[i], g, 0.25, fit.constants)) << "rep " << rep << " row " << i;
        const double shape = theorem32_envelope(t[i], g, 0.25, {fit.constants.c9, 1.0});
        EXPECT_GE(std::fma(fit.constants.c10, shape, -L[i]), 0.0) << "rep " << rep << " row " << i;
      }
    }
  }
}

TEST(Envelope, FallsBackToSmallestC10WhenCapIsExceeded) {
  const auto g = expo(2.0, 0.2, 1.0);
  std::vector<double> t{0.0, 1.0, 2.0}, L{1e-9, 1.0, 1.0};
  const auto fit = fit_envelope(t, L, g, 0.25, default_c9_grid());
  EXPECT_FALSE(fit.within_cap);
  EXPECT_EQ(fit.grid_index, 0u);
}

TEST(Envelope, RequiresExponentialRegime) {
  EXPECT_THROW(theorem32_envelope(1.0, poly(1.5, 0.05), 0.25, {1.0, 1.0}), ConfigError);
  EXPECT_THROW(theorem32_envelope(-1.0, expo(2.0, 0.2), 0.25, {1.0, 1.0}), DomainError);
}

TEST(DecayFit, RecoversPowerLawAndStretchedExponent) {
  std::vector<double> t, pl, se;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(k);
    pl.push_back(3.0 * std::pow(1.0 + k, -0.8));
    se.push_back(std::exp(-0.2 * std::pow(static_cast<double>(k), 0.6)));
  }
  const auto a = fit_decay_rate(t, pl, 20, 200, DecayModel::power_law);
  EXPECT_NEAR(a.exponent, -0.8, 1e-12);
  EXPECT_NEAR(a.intercept, std::log(3.0), 1e-10);
  EXPECT_EQ(a.samples, 181u);
  const auto b = fit_decay_rate(t, se, 0, 200, DecayModel::stretched_exp);
  EXPECT_NEAR(b.exponent, 0.6, 1e-12);
  EXPECT_NEAR(std::exp(b.intercept), 0.2, 1e-12);
}

TEST(DecayFit, DataErrors) {
  std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7, 8}, v(9, 1.0);
  v[3] = 0.0;
  EXPECT_THROW(fit_decay_rate(t, v, 0, 10, DecayModel::power_law), DataError);
  v[3] = 1.0;
  EXPECT_THROW(fit_decay_rate(t, v, 0, 3, DecayModel::power_law), DataError);
  EXPECT_THROW(fit_decay_rate(t, v, 0, 10, DecayModel::stretched_exp), DataError);
}
