// SPDX-License-Identifier: Apache-2.0
//
// Relativistic kinematics of the RCS particle: Lorentz factor, the momentum
// factor F, the scalar speed map G and its inverse, and F~ = F o G^{-1}.
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rkcs/errors.hpp"
#include "rkcs/vecops.hpp"

namespace rkcs {

/// Speed of light in simulation units.
class LightSpeed {
 public:
  explicit LightSpeed(double c) : c_(c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw DomainError("speed of light must be positive and finite, got " + std::to_string(c));
    }
  }
  [[nodiscard]] double value() const noexcept { return c_; }
  [[nodiscard]] double squared() const noexcept { return c_ * c_; }

 private:
  double c_;
};

struct SpeedMapSolverOpts {
  double rel_tol = 1e-13;
  int max_iter = 128;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-6)) {
      throw ConfigError("solver.rel_tol must lie in (0, 1e-6]");
    }
    if (max_iter < 16) throw ConfigError("solver.max_iter must be >= 16");
  }
};

/// Speeds at or above c*(1 - kNearLightGuard) are rejected by speed_map.
inline constexpr double kNearLightGuard = 1e-12;

// ---------------------------------------------------------------------------
// Forward maps (velocity -> momentum)

inline double lorentz_gamma(double speed, LightSpeed c) {
  const double cv = c.value();
  if (!(speed >= 0.0) || !(speed < cv)) {
    throw DomainError("lorentz_gamma: speed " + std::to_string(speed) + " outside [0, c)");
  }
  // (c - s)(c + s) avoids cancellation in c^2 - s^2 near the light cone.
  return cv / std::sqrt((cv - speed) * (cv + speed));
}

inline double lorentz_gamma(std::span<const double> v, LightSpeed c) { return lorentz_gamma(norm(v), c); }

inline double momentum_factor(double speed, LightSpeed c) {
  const double g = lorentz_gamma(speed, c);
  return g * (1.0 + g / c.squared());
}

inline double momentum_factor(std::span<const double> v, LightSpeed c) {
  return momentum_factor(norm(v), c);
}

inline std::vector<double> velocity_to_momentum(std::span<const double> v, LightSpeed c) {
  const double f = momentum_factor(v, c);
  std::vector<double> w(v.begin(), v.end());
  for (double& x : w) x *= f;
  return w;
}

/// G(s) = F(s) s, strictly increasing on [0, c).
inline double speed_map(double speed, LightSpeed c) {
  if (!(speed >= 0.0)) throw DomainError("speed_map: negative speed");
  if (!(speed < c.value() * (1.0 - kNearLightGuard))) {
    throw DomainError("speed_map: speed " + std::to_string(speed) + " too close to or above c");
  }
  return momentum_factor(speed, c) * speed;
}

/// dG/ds = Gamma^3 + Gamma^2 (2 Gamma^2 - 1) / c^2.
inline double speed_map_derivative(double speed, LightSpeed c) {
  const double g = lorentz_gamma(speed, c);
  return g * g * g + g * g * (2.0 * g * g - 1.0) / c.squared();
}

// ---------------------------------------------------------------------------
// Inverse maps (momentum -> velocity)

namespace detail {

// The inverse is solved in the proper-velocity variable p = Gamma |v| / c,
// where |w| = h(p) = c p + p sqrt(1 + p^2) / c. h is smooth, convex and
// strictly increasing on [0, inf), so the solve stays well conditioned even
// when |v| is within a few ulps of c.
inline double momentum_of_proper_velocity(double p, double c) {
  return c * p + p * std::sqrt(1.0 + p * p) / c;
}

inline double momentum_of_proper_velocity_derivative(double p, double c) {
  const double root = std::sqrt(1.0 + p * p);
  return c + (1.0 + 2.0 * p * p) / (c * root);
}

/// Bracketed Newton iteration with bisection fallback for h(p) = m.
inline double solve_proper_velocity(double m, LightSpeed light, const SpeedMapSolverOpts& opts) {
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw DomainError("invert_speed_map: momentum magnitude must be finite and >= 0");
  }
  if (m == 0.0) return 0.0;
  const double c = light.value();
  const double tol = opts.rel_tol * std::max(m, 1.0);

  // h(p) >= p h'(0) and h(p) >= p^2 / c, so the root is below both bounds.
  double hi = std::min(m / (c + 1.0 / c), std::sqrt(c * m));
  double lo = 0.0;
  double p = hi;
  for (int it = 0; it < opts.max_iter; ++it) {
    const double r = momentum_of_proper_velocity(p, c) - m;
    if (std::abs(r) <= tol) return p;
    if (r > 0.0) {
      hi = p;
    } else {
      lo = p;
    }
    double next = p - r / momentum_of_proper_velocity_derivative(p, c);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == p) return p;
    p = next;
  }
  throw SolverError("invert_speed_map: no convergence for |w| = " + std::to_string(m));
}

}  // namespace detail

/// G^{-1}(m): the speed whose momentum magnitude is m.
inline double invert_speed_map(double m, LightSpeed c, const SpeedMapSolverOpts& opts = {}) {
  const double p = detail::solve_proper_velocity(m, c, opts);
  return c.value() * p / std::sqrt(1.0 + p * p);
}

/// F~(m) = F(G^{-1}(m)), so that |v| = m / F~(m).
inline double momentum_factor_tilde(double m, LightSpeed c, const SpeedMapSolverOpts& opts = {}) {
  if (m == 0.0) return 1.0 + 1.0 / c.squared();
  const double p = detail::solve_proper_velocity(m, c, opts);
  const double g = std::sqrt(1.0 + p * p);
  return g * (1.0 + g / c.squared());
}

inline std::vector<double> momentum_to_velocity(std::span<const double> w, LightSpeed c,
                                                const SpeedMapSolverOpts& opts = {}) {
  const double inv = 1.0 / momentum_factor_tilde(norm(w), c, opts);
  std::vector<double> v(w.begin(), w.end());
  for (double& x : v) x *= inv;
  return v;
}

// ---------------------------------------------------------------------------
// Coercivity of w -> w / F~(|w|) on a ball of radius R

/// Lambda(R) = K / (2 (1 + R^2/c^2)^{3/2}); K is the unspecified order constant.
inline double coercivity_constant(double radius, LightSpeed c, double order_constant = 1.0) {
  const double q = 1.0 + radius * radius / c.squared();
  return order_constant / (2.0 * q * std::sqrt(q));
}

/// Sharp coercivity constant on the R-ball: 1 / G'(G^{-1}(R)).
///
/// The Jacobian of w -> w/F~ has eigenvalues ds/dm (radial) and s/m
/// (tangential); G^{-1} is concave, so the minimum over the ball is the radial
/// derivative at m = R.
inline double sharp_coercivity_constant(double radius, LightSpeed c, const SpeedMapSolverOpts& opts = {}) {
  const double p = detail::solve_proper_velocity(radius, c, opts);
  const double g = std::sqrt(1.0 + p * p);
  return 1.0 / (g * g * g + g * g * (2.0 * g * g - 1.0) / c.squared());
}

struct CoercivityResult {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = <x - y, x/F~(|x|) - y/F~(|y|)>, rhs = Lambda(R) |x - y|^2.
inline CoercivityResult coercivity_check(std::span<const double> x, std::span<const double> y, double radius,
                                         LightSpeed c, const SpeedMapSolverOpts& opts = {},
                                         double order_constant = 1.0) {
  if (x.size() != y.size()) throw PreconditionError("coercivity_check: dimension mismatch");
  if (norm(x) > radius || norm(y) > radius) {
    throw PreconditionError("coercivity_check: points must lie in the closed R-ball");
  }
  const auto vx = momentum_to_velocity(x, c, opts);
  const auto vy = momentum_to_velocity(y, c, opts);
  double lhs = 0.0;
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - y[k];
    lhs += dx * (vx[k] - vy[k]);
    d2 += dx * dx;
  }
  return {lhs, coercivity_constant(radius, c, order_constant) * d2};
}

}  // namespace rkcs
