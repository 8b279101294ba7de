// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rkcs/kernel.hpp"

using namespace rkcs;

TEST(CommWeight, KnownValues) {
  EXPECT_DOUBLE_EQ(comm_weight(0.0, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(comm_weight(5.0, 0.0), 1.0);
  EXPECT_NEAR(comm_weight(1.0, 2.0), 0.5, 1e-16);
  EXPECT_NEAR(comm_weight(std::sqrt(3.0), 1.0), 0.5, 1e-15);
  EXPECT_NEAR(comm_weight(2.0, CommWeight(0.5)), std::pow(5.0, -0.25), 1e-15);
}

TEST(CommWeight, NonincreasingAndPositive) {
  for (double beta : {0.1, 0.5, 0.99, 3.0}) {
    double prev = 2.0;
    for (int k = 0; k <= 200; ++k) {
      const double w = comm_weight(0.25 * k, beta);
      EXPECT_GT(w, 0.0);
      EXPECT_LE(w, prev);
      prev = w;
    }
  }
}

TEST(CommWeight, RejectsBadArguments) {
  EXPECT_THROW(comm_weight(-1.0, 0.5), DomainError);
  EXPECT_THROW(CommWeight(-0.1), DomainError);
  EXPECT_THROW(CommWeight(std::nan("")), DomainError);
}

TEST(PowGe1, MatchesStdPow) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lu(0.0, 30.0), ue(-5.0, 0.0);
  for (int k = 0; k < 100000; ++k) {
    const double u = std::exp(lu(rng));
    const double e = ue(rng);
    const double ref = std::pow(u, e);
    if (ref < 1e-300) continue;
    const double y = std::abs(e * std::log(u));
    EXPECT_NEAR(detail::pow_ge1(u, e), ref, 4e-16 * (1.0 + y) * ref) << "u=" << u << " e=" << e;
  }
  EXPECT_DOUBLE_EQ(detail::pow_ge1(1.0, -0.3), 1.0);
  EXPECT_DOUBLE_EQ(detail::pow_ge1(7.0, 0.0), 1.0);
}

TEST(PowGe1, UnderflowIsClampedToTinyPositive) {
  const double v = detail::pow_ge1(1e300, -10.0);
  EXPECT_GE(v, 0.0);
  EXPECT_LT(v, 1e-300);
}

TEST(Gauges, PolynomialRadii) {
  const Gauge g = GaugePolynomial{2.0, 1.5, 3.0, 0.1};
  EXPECT_DOUBLE_EQ(radius_x(0.0, g), 2.0);
  EXPECT_DOUBLE_EQ(radius_w(0.0, g), 3.0);
  EXPECT_NEAR(radius_x(3.0, g), 2.0 * 8.0, 1e-13);
  EXPECT_NEAR(radius_w(3.0, g), 3.0 * std::pow(4.0, 0.1), 1e-14);
}

TEST(Gauges, ExponentialRadii) {
  const Gauge g = GaugeExponential{1.0, 2.5, 2.0, 0.2};
  EXPECT_DOUBLE_EQ(radius_x(4.0, g), 11.0);
  EXPECT_NEAR(radius_w(4.0, g), 2.0 * std::pow(5.0, 0.2), 1e-14);
}

TEST(Gauges, NegativeTimeIsRejected) {
  const Gauge g = GaugePolynomial{};
  EXPECT_THROW(radius_x(-1.0, g), DomainError);
  EXPECT_THROW(radius_w(-1e-9, g), DomainError);
  EXPECT_THROW(phi_lower(-1.0, g, 0.5), DomainError);
}

TEST(PhiLower, IsInfimumOverTheBall) {
  // Any two points of the R_x(t)-ball are at most 2 R_x(t) apart.
  const Gauge g = GaugePolynomial{1.0, 1.5, 1.0, 0.05};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double t : {0.0, 1.0, 10.0}) {
    const double R = radius_x(t, g);
    const double lo = phi_lower(t, g, 0.5);
    EXPECT_DOUBLE_EQ(lo, comm_weight(2.0 * R, 0.5));
    for (int k = 0; k < 1000; ++k) {
      double a[2] = {u(rng), u(rng)}, b[2] = {u(rng), u(rng)};
      const double na = std::hypot(a[0], a[1]), nb = std::hypot(b[0], b[1]);
      if (na > 1.0 || nb > 1.0) continue;
      const double s = R * std::hypot(a[0] - b[0], a[1] - b[1]);
      EXPECT_GE(comm_weight(s, 0.5), lo);
    }
  }
}

TEST(PhiLower, DecreasesInTime) {
  const Gauge g = GaugeExponential{1.0, 2.0, 1.0, 0.2};
  double prev = 2.0;
  for (double t = 0.0; t < 50.0; t += 0.5) {
    const double v = phi_lower(t, g, 0.25);
    EXPECT_LT(v, prev);
    prev = v;
  }
}
