// SPDX-License-Identifier: Apache-2.0
//
// Communication weight phi(s) = (1 + s^2)^(-beta/2) and the time-growing
// effective-domain gauges R_x(t), R_w(t).
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

#include "rkcs/errors.hpp"

namespace rkcs {

struct CommWeight {
  double beta = 0.0;

  explicit CommWeight(double b = 0.0) : beta(b) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("communication weight: beta must be >= 0");
  }
};

struct GaugePolynomial {
  double r_x0 = 1.0;
  double gamma_p = 1.5;
  double r_w0 = 1.0;
  double delta_p = 0.05;
};

struct GaugeExponential {
  double r_x0 = 1.0;
  double gamma_e = 2.0;
  double r_w0 = 1.0;
  double delta_e = 0.2;
};

using Gauge = std::variant<GaugePolynomial, GaugeExponential>;

namespace detail {

inline void require_time(double t, const char* who) {
  if (!(t >= 0.0)) throw DomainError(std::string(who) + ": time must be >= 0");
}

/// u^e for u >= 1 and e <= 0, written without calls or branches so the
/// pairwise loops vectorize. Relative error against std::pow stays below
/// 4e-16 (1 + |e log u|).
inline double pow_ge1(double u, double e) noexcept {
  constexpr std::uint64_t kSqrtHalf = 0x3fe6a09e667f3bcdULL;
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(u);
  // Re-bias so the mantissa lands in [sqrt(1/2), sqrt(2)).
  const std::uint64_t adj = bits + (0x3ff0000000000000ULL - kSqrtHalf);
  const double k = static_cast<double>(static_cast<std::int64_t>(adj >> 52) - 1023);
  const double m = std::bit_cast<double>((adj & 0x000fffffffffffffULL) + kSqrtHalf);

  // log2 m = z h(z^2), z = (m - 1)/(m + 1), |z| < 0.172; h is a minimax fit.
  const double z = (m - 1.0) / (m + 1.0);
  const double w = z * z;
  double h = 0.21365895696587339708;
  h = h * w + 0.22091308422900802469;
  h = h * w + 0.26233435250426400156;
  h = h * w + 0.32059853491395837207;
  h = h * w + 0.41219858584090054842;
  h = h * w + 0.57707801634552022944;
  h = h * w + 0.96179669392598972877;
  h = h * w + 2.8853900817779268115;
  // Clamped so the exponent bits below stay normal; 2^-1022 is far below any
  // weight that can matter next to the O(1) diagonal terms.
  const double y = std::max(e * (k + z * h), -1022.0);

  // 2^y = 2^n 2^f with n = round(y), |f| <= 1/2; n sits in the low bits of t.
  constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52
  const double t = y + shifter;
  const double f = y - (t - shifter);
  double q = 4.4549605981865561208e-10;
  q = q * f + 7.0725859492692944788e-9;
  q = q * f + 1.0178062445845773332e-7;
  q = q * f + 1.3215442587921689299e-6;
  q = q * f + 1.5252733829836118395e-5;
  q = q * f + 1.5403530441736050155e-4;
  q = q * f + 1.333355814641693531e-3;
  q = q * f + 9.6181291076068885273e-3;
  q = q * f + 5.5504108664821594339e-2;
  q = q * f + 0.2402265069591009822;
  q = q * f + 0.69314718055994530942;
  q = q * f + 1.0;
  const double scale = std::bit_cast<double>((std::bit_cast<std::uint64_t>(t) + 1023) << 52);
  return q * scale;
}

}  // namespace detail

inline double comm_weight(double s, double beta) {
  if (!(s >= 0.0)) throw DomainError("comm_weight: distance must be >= 0");
  if (beta == 0.0) return 1.0;
  return std::pow(1.0 + s * s, -0.5 * beta);
}

inline double comm_weight(double s, CommWeight w) { return comm_weight(s, w.beta); }

inline double radius_x(double t, const Gauge& g) {
  detail::require_time(t, "radius_x");
  if (const auto* p = std::get_if<GaugePolynomial>(&g)) return p->r_x0 * std::pow(1.0 + t, p->gamma_p);
  const auto& e = std::get<GaugeExponential>(g);
  return e.r_x0 + e.gamma_e * t;
}

inline double radius_w(double t, const Gauge& g) {
  detail::require_time(t, "radius_w");
  if (const auto* p = std::get_if<GaugePolynomial>(&g)) return p->r_w0 * std::pow(1.0 + t, p->delta_p);
  const auto& e = std::get<GaugeExponential>(g);
  return e.r_w0 * std::pow(1.0 + t, e.delta_e);
}

/// Infimum of phi over pairs inside the R_x(t)-ball, phi(2 R_x(t)).
inline double phi_lower(double t, const Gauge& g, double beta) {
  return comm_weight(2.0 * radius_x(t, g), beta);
}

}  // namespace rkcs
