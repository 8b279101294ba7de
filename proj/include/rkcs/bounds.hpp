// SPDX-License-Identifier: Apache-2.0
//
// Decay envelopes, parameter admissibility, the three-term Groenwall bound,
// closed-form tail bounds and log-space rate fitting.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rkcs/errors.hpp"
#include "rkcs/kernel.hpp"
#include "rkcs/relkin.hpp"

namespace rkcs {

enum class Regime { polynomial, exponential };

inline const char* to_string(Regime r) { return r == Regime::polynomial ? "polynomial" : "exponential"; }

struct GaugeParams {
  Gauge gauge = GaugePolynomial{};
  double D = 8.0;
  double l1 = 2.0;
  double alpha = 1.0;
  // Initial empirical moments M_p(mu0, D) and M_e(mu0, alpha); NaN until attached.
  double moment_p0 = std::numeric_limits<double>::quiet_NaN();
  double moment_e0 = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] Regime regime() const noexcept {
    return std::holds_alternative<GaugePolynomial>(gauge) ? Regime::polynomial : Regime::exponential;
  }
};

/// Names of every violated admissibility inequality; empty means admissible.
inline std::vector<std::string> check_params(const GaugeParams& g, double beta, double c) {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const char* name) {
    if (!ok) bad.emplace_back(name);
  };
  if (const auto* p = std::get_if<GaugePolynomial>(&g.gauge)) {
    need(g.l1 > 1.0, "l1 > 1");
    need(g.D >= 2.0 * g.l1, "D >= 2 l1");
    need(beta >= 0.0 && beta < 1.0, "0 <= beta < 1");
    need(p->gamma_p > 1.0, "gamma_p > 1");
    need(beta * p->gamma_p < 1.0, "beta gamma_p < 1");
    need(p->delta_p > 0.0 && p->delta_p < (1.0 - beta * p->gamma_p) / 3.0, "0 < delta_p < (1 - beta gamma_p)/3");
  } else {
    const auto& e = std::get<GaugeExponential>(g.gauge);
    need(g.alpha > 0.0, "alpha > 0");
    need(beta >= 0.0 && beta < 1.0, "0 <= beta < 1");
    need(e.gamma_e > c, "gamma_e > c");
    need(e.delta_e > 0.0 && e.delta_e < (1.0 - beta) / 3.0, "0 < delta_e < (1 - beta)/3");
  }
  return bad;
}

/// lambda = min{ delta_p ((l1 - 1) D / l1 + 3), (D/2)(gamma_p - 1) }
inline double theorem31_exponent(const GaugeParams& g) {
  const auto* p = std::get_if<GaugePolynomial>(&g.gauge);
  if (p == nullptr) throw ConfigError("theorem31_exponent: polynomial regime required");
  if (!(g.l1 > 1.0) || !(g.D >= 2.0 * g.l1) || !(p->gamma_p > 1.0) || !(p->delta_p > 0.0)) {
    throw ConfigError("theorem31_exponent: inadmissible polynomial parameters");
  }
  return std::min(p->delta_p * ((g.l1 - 1.0) * g.D / g.l1 + 3.0), 0.5 * g.D * (p->gamma_p - 1.0));
}

/// The spatial-cohesion statement additionally needs lambda > 2.
inline bool cohesion_admissible(const GaugeParams& g) { return theorem31_exponent(g) > 2.0; }

struct EnvelopeConstants {
  double c9 = 0.0;
  double c10 = 0.0;
};

namespace detail {

inline const GaugeExponential& exp_gauge(const GaugeParams& g, const char* who) {
  const auto* e = std::get_if<GaugeExponential>(&g.gauge);
  if (e == nullptr) throw ConfigError(std::string(who) + ": exponential regime required");
  return *e;
}

inline double envelope_shape(double t, const GaugeParams& g, double beta, double c9) {
  const auto& e = exp_gauge(g, "theorem32_envelope");
  const double a = 1.0 - (3.0 * e.delta_e + beta);
  return std::exp(-c9 * std::pow(t, a)) + std::exp(-0.25 * g.alpha * std::pow(1.0 + t, e.delta_e));
}

}  // namespace detail

/// C10 (exp(-C9 t^{1 - (3 delta_e + beta)}) + exp(-(alpha/4)(1 + t)^{delta_e}))
inline double theorem32_envelope(double t, const GaugeParams& g, double beta, EnvelopeConstants k) {
  if (!(t >= 0.0)) throw DomainError("theorem32_envelope: time must be >= 0");
  return k.c10 * detail::envelope_shape(t, g, beta, k.c9);
}

struct EnvelopeFit {
  EnvelopeConstants constants;
  double c10_cap = 0.0;    // 1e3 L(0)
  bool within_cap = false;
  std::size_t grid_index = 0;
};

/// Log-spaced C9 candidates on [1e-4, 1e2].
inline std::vector<double> default_c9_grid(std::size_t n = 241) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = std::pow(10.0, -4.0 + 6.0 * static_cast<double>(k) / (n - 1));
  return g;
}

/// For each C9 the smallest dominating C10 is max_i L_i / shape_i, rounded up
/// so the product dominates exactly. Returns the
/// largest C9 (fastest decay) whose C10 stays within the cap 1e3 L(0); if no
/// candidate fits, the one with the smallest C10 (lowest index on ties).
inline EnvelopeFit fit_envelope(std::span<const double> t, std::span<const double> L, const GaugeParams& g,
                                double beta, std::span<const double> c9_grid) {
  if (t.size() != L.size() || t.empty()) throw PreconditionError("fit_envelope: series size mismatch or empty");
  if (c9_grid.empty()) throw PreconditionError("fit_envelope: empty grid");
  EnvelopeFit best;
  best.c10_cap = 1e3 * L[0];
  double min_c10 = std::numeric_limits<double>::infinity();
  std::size_t min_idx = 0;
  bool found = false;
  std::vector<double> shape;
  for (std::size_t k = 0; k < c9_grid.size(); ++k) {
    shape.resize(t.size());
    double c10 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      shape[i] = detail::envelope_shape(t[i], g, beta, c9_grid[k]);
      c10 = std::max(c10, L[i] / shape[i]);
    }
    // The quotient can round down; step up until the exact product
    // c10 * shape_i reaches L_i, so dominance holds whether or not the caller
    // fuses the multiply into a subtraction.
    for (std::size_t i = 0; i < t.size() && std::isfinite(c10); ++i) {
      while (std::fma(c10, shape[i], -L[i]) < 0.0) c10 = std::nextafter(c10, std::numeric_limits<double>::infinity());
    }
    if (c10 < min_c10) {
      min_c10 = c10;
      min_idx = k;
    }
    if (c10 <= best.c10_cap) {
      best.constants = {c9_grid[k], c10};
      best.grid_index = k;
      found = true;
    }
  }
  if (!found) {
    best.constants = {c9_grid[min_idx], min_c10};
    best.grid_index = min_idx;
  }
  best.within_cap = found;
  return best;
}

/// y0 e^{-int_0^t p} + e^{-int_{t/2}^t p} int_0^{t/2} q + q(t/2) int_{t/2}^t e^{-int_s^t p} ds
/// with composite Simpson quadrature on a grid no coarser than `step`.
inline double gronwall_bound(double y0, const std::function<double(double)>& p,
                             const std::function<double(double)>& q, double t, double step) {
  if (!(t >= 0.0)) throw PreconditionError("gronwall_bound: t must be >= 0");
  if (!(step > 0.0)) throw PreconditionError("gronwall_bound: quadrature step must be > 0");
  auto sample = [](const std::function<double(double)>& f, double s, const char* name) {
    const double v = f(s);
    if (!(v >= 0.0)) throw PreconditionError(std::string("gronwall_bound: negative ") + name + " sample");
    return v;
  };
  if (t == 0.0) {
    sample(p, 0.0, "p");
    sample(q, 0.0, "q");
    return y0;
  }
  std::size_t n = static_cast<std::size_t>(std::ceil(t / step));
  n = std::max<std::size_t>(4, (n + 3) / 4 * 4);
  const double h = t / static_cast<double>(n);
  std::vector<double> ps(n + 1), qs(n / 2 + 1), cum(n + 1, 0.0);
  for (std::size_t k = 0; k <= n; ++k) ps[k] = sample(p, h * k, "p");
  for (std::size_t k = 0; k <= n / 2; ++k) qs[k] = sample(q, h * k, "q");
  for (std::size_t k = 0; k < n; ++k) {
    const double mid = sample(p, h * (k + 0.5), "p");
    cum[k + 1] = cum[k] + h / 6.0 * (ps[k] + 4.0 * mid + ps[k + 1]);
  }
  auto simpson = [h](const std::vector<double>& f, std::size_t a, std::size_t b) {
    double s = f[a] + f[b];
    for (std::size_t k = a + 1; k < b; ++k) s += ((k - a) % 2 == 1 ? 4.0 : 2.0) * f[k];
    return s * h / 3.0;
  };
  const std::size_t half = n / 2;
  const double p_total = cum[n];
  const double term1 = y0 * std::exp(-p_total);
  const double term2 = std::exp(-(p_total - cum[half])) * simpson(qs, 0, half);
  std::vector<double> kernel(n + 1, 0.0);
  for (std::size_t k = half; k <= n; ++k) kernel[k] = std::exp(-(p_total - cum[k]));
  const double term3 = qs[half] * simpson(kernel, half, n);
  return term1 + term2 + term3;
}

enum class TailSide { x, w };

namespace detail {

inline double attached(double m, const char* name) {
  if (!std::isfinite(m)) throw PreconditionError(std::string(name) + " not attached to gauge parameters");
  return m;
}

}  // namespace detail

/// w: M_p / R_w^D; x: 2^{D-1} max{M_p, c^D} (1 + t)^D / R_x^D
inline double tail_bound_poly(double t, const GaugeParams& g, LightSpeed c, TailSide which) {
  const double mp = detail::attached(g.moment_p0, "M_p");
  if (which == TailSide::w) return mp / std::pow(radius_w(t, g.gauge), g.D);
  const double ratio = (1.0 + t) / radius_x(t, g.gauge);
  return std::pow(2.0, g.D - 1.0) * std::max(mp, std::pow(c.value(), g.D)) * std::pow(ratio, g.D);
}

/// w: M_e e^{-alpha R_w}; x: M_e e^{alpha (c t - R_x)}
inline double tail_bound_exp(double t, const GaugeParams& g, LightSpeed c, TailSide which) {
  const double me = detail::attached(g.moment_e0, "M_e");
  if (which == TailSide::w) return me * std::exp(-g.alpha * radius_w(t, g.gauge));
  return me * std::exp(g.alpha * (c.value() * t - radius_x(t, g.gauge)));
}

inline double tail_bound(double t, const GaugeParams& g, LightSpeed c, TailSide which) {
  return g.regime() == Regime::polynomial ? tail_bound_poly(t, g, c, which) : tail_bound_exp(t, g, c, which);
}

enum class DecayModel { power_law, stretched_exp };

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::size_t samples = 0;
};

/// Values below this are treated as converged and excluded from rate fits.
inline constexpr double kDecayFloor = 1e-12;

/// power_law: slope of log v against log(1 + t). stretched_exp: slope of
/// log(-log v) against log t, which needs 0 < v < 1 and t > 0.
inline RateFit fit_decay_rate(std::span<const double> t, std::span<const double> v, double t_min, double t_max,
                              DecayModel model) {
  if (t.size() != v.size()) throw PreconditionError("fit_decay_rate: series size mismatch");
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min || t[i] > t_max) continue;
    if (!(v[i] > 0.0)) throw DataError("fit_decay_rate: nonpositive value at t = " + std::to_string(t[i]));
    if (model == DecayModel::power_law) {
      X.push_back(std::log1p(t[i]));
      Y.push_back(std::log(v[i]));
    } else {
      if (t[i] <= 0.0) continue;
      if (!(v[i] < 1.0)) throw DataError("fit_decay_rate: stretched_exp needs values below 1");
      X.push_back(std::log(t[i]));
      Y.push_back(std::log(-std::log(v[i])));
    }
  }
  if (X.size() < 8) throw DataError("fit_decay_rate: fewer than 8 samples in window");
  const double n = static_cast<double>(X.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  if (!(sxx > 0.0)) throw DataError("fit_decay_rate: degenerate abscissae");
  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  for (std::size_t i = 0; i < X.size(); ++i) {
    fit.residual = std::max(fit.residual, std::abs(Y[i] - (fit.intercept + fit.exponent * X[i])));
  }
  fit.samples = X.size();
  return fit;
}

}  // namespace rkcs
