// SPDX-License-Identifier: Apache-2.0
//
// Functionals evaluated on an ensemble snapshot.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "rkcs/bounds.hpp"
#include "rkcs/ensemble.hpp"
#include "rkcs/kernel.hpp"
#include "rkcs/parallel.hpp"
#include "rkcs/relkin.hpp"
#include "rkcs/vecops.hpp"

namespace rkcs {

struct Centers {
  std::vector<double> x_c;
  std::vector<double> w_c;
};

namespace detail {

inline std::vector<double> mean_rows(std::span<const double> a, std::size_t n, std::size_t d) {
  std::vector<CompensatedSum> acc(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) acc[k].add(a[i * d + k]);
  }
  std::vector<double> m(d);
  for (std::size_t k = 0; k < d; ++k) m[k] = acc[k].value() / static_cast<double>(n);
  return m;
}

inline double centered_second_moment(std::span<const double> a, std::size_t n, std::size_t d,
                                     std::span<const double> center) {
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double dv = a[i * d + k] - center[k];
      r2 += dv * dv;
    }
    s.add(r2);
  }
  return s.value() / static_cast<double>(n);
}

inline double max_pairwise_distance(std::span<const double> a, std::size_t n, std::size_t d) {
  std::vector<double> row_max(n, 0.0);
  default_pool().parallel_for(
      n,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          double m = 0.0;
          for (std::size_t j = i + 1; j < n; ++j) {
            double r2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
              const double dv = a[i * d + k] - a[j * d + k];
              r2 += dv * dv;
            }
            m = std::max(m, r2);
          }
          row_max[i] = m;
        }
      },
      64);
  return std::sqrt(*std::max_element(row_max.begin(), row_max.end()));
}

}  // namespace detail

inline Centers centers(const Ensemble& e) {
  return {detail::mean_rows(e.positions(), e.size(), e.dim()), detail::mean_rows(e.momenta(), e.size(), e.dim())};
}

/// L = (1/N) sum |w_i - w_c|^2
inline double velocity_fluctuation(const Ensemble& e) {
  const auto wc = detail::mean_rows(e.momenta(), e.size(), e.dim());
  return detail::centered_second_moment(e.momenta(), e.size(), e.dim(), wc);
}

inline double spatial_fluctuation(const Ensemble& e) {
  const auto xc = detail::mean_rows(e.positions(), e.size(), e.dim());
  return detail::centered_second_moment(e.positions(), e.size(), e.dim(), xc);
}

/// Drift velocity of the cohesion functional: w_c0 / F~(|w_c0|).
inline std::vector<double> drift_velocity(std::span<const double> w_c0, LightSpeed c,
                                          const SpeedMapSolverOpts& opts = {}) {
  return momentum_to_velocity(w_c0, c, opts);
}

/// (1/N) sum |x_i - v_drift t - x_c0|^2
inline double cohesion_drift(const Ensemble& e, double t, std::span<const double> w_c0, std::span<const double> x_c0,
                             LightSpeed c, const SpeedMapSolverOpts& opts = {}) {
  if (!(t >= 0.0)) throw DomainError("cohesion_drift: time must be >= 0");
  if (w_c0.size() != e.dim() || x_c0.size() != e.dim()) throw PreconditionError("cohesion_drift: dimension mismatch");
  const auto v = drift_velocity(w_c0, c, opts);
  std::vector<double> center(e.dim());
  for (std::size_t k = 0; k < e.dim(); ++k) center[k] = x_c0[k] + v[k] * t;
  return detail::centered_second_moment(e.positions(), e.size(), e.dim(), center);
}

inline double tail_mass_x(const Ensemble& e, double radius) {
  if (!(radius >= 0.0)) throw PreconditionError("tail_mass_x: radius must be >= 0");
  std::size_t k = 0;
  for (std::size_t i = 0; i < e.size(); ++i) k += norm(e.x(i)) >= radius ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(e.size());
}

inline double tail_mass_w(const Ensemble& e, double radius) {
  if (!(radius >= 0.0)) throw PreconditionError("tail_mass_w: radius must be >= 0");
  std::size_t k = 0;
  for (std::size_t i = 0; i < e.size(); ++i) k += norm(e.w(i)) >= radius ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(e.size());
}

/// Binomial standard error sqrt(q (1 - q) / N) with q clamped to [0, 1].
inline double binomial_se(double q, std::size_t n) {
  q = std::clamp(q, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(n));
}

struct Diameters {
  double diam_x = 0.0;
  double diam_w = 0.0;
};

inline Diameters support_diameters(const Ensemble& e) {
  return {detail::max_pairwise_distance(e.positions(), e.size(), e.dim()),
          detail::max_pairwise_distance(e.momenta(), e.size(), e.dim())};
}

/// (1/N) sum |x_i|^D
inline double moment_x(const Ensemble& e, double order) {
  CompensatedSum s;
  for (std::size_t i = 0; i < e.size(); ++i) s.add(std::pow(norm(e.x(i)), order));
  return s.value() * e.weight();
}

/// (1/N) sum |w_i|^D
inline double moment_w(const Ensemble& e, double order) {
  CompensatedSum s;
  for (std::size_t i = 0; i < e.size(); ++i) s.add(std::pow(norm(e.w(i)), order));
  return s.value() * e.weight();
}

/// (1/N) sum exp(alpha |w_i|); +inf once it leaves the double range.
inline double moment_exp_w(const Ensemble& e, double alpha) {
  CompensatedSum s;
  for (std::size_t i = 0; i < e.size(); ++i) s.add(std::exp(alpha * norm(e.w(i))));
  return s.value() * e.weight();
}

inline double max_speed(const Ensemble& e, LightSpeed c, const SpeedMapSolverOpts& opts = {}) {
  double m = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double wn = norm(e.w(i));
    m = std::max(m, wn / momentum_factor_tilde(wn, c, opts));
  }
  return m;
}

/// Root-mean-square phase-space distance between two labelled ensembles.
inline double state_distance(const Ensemble& a, const Ensemble& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) throw PreconditionError("state_distance: shape mismatch");
  CompensatedSum s;
  const auto xa = a.positions(), xb = b.positions(), wa = a.momenta(), wb = b.momenta();
  for (std::size_t k = 0; k < xa.size(); ++k) {
    const double dx = xa[k] - xb[k], dw = wa[k] - wb[k];
    s.add(dx * dx + dw * dw);
  }
  return std::sqrt(s.value() / static_cast<double>(a.size()));
}

struct ReferenceState {
  std::vector<double> x_c0;
  std::vector<double> w_c0;
};

inline ReferenceState reference_of(const Ensemble& e0) {
  auto cs = centers(e0);
  return {std::move(cs.x_c), std::move(cs.w_c)};
}

struct DiagnosticsRow {
  double t = 0.0;
  std::vector<double> x_c;
  std::vector<double> w_c;
  double L = 0.0;
  double spatial_fluct = 0.0;
  double cohesion_drift = 0.0;
  double wc_dev = 0.0;
  double mom_x_D = 0.0;
  double mom_w_D = 0.0;
  double mom_exp_alpha = 0.0;
  double tail_x = 0.0;
  double tail_w = 0.0;
  double bound_tail_x = 0.0;
  double bound_tail_w = 0.0;
  double phi_lower = 0.0;
  double diam_x = 0.0;
  double diam_w = 0.0;
  double max_speed = 0.0;

  static constexpr std::array<const char*, 16> kColumns = {
      "t",          "L",          "spatial_fluct", "cohesion_drift", "wc_dev", "mom_x_D",
      "mom_w_D",    "mom_exp_alpha", "tail_x",    "tail_w",         "bound_tail_x", "bound_tail_w",
      "phi_lower",  "diam_x",     "diam_w",        "max_speed"};

  [[nodiscard]] std::array<double, 16> values() const {
    return {t,      L,      spatial_fluct, cohesion_drift, wc_dev,       mom_x_D,   mom_w_D, mom_exp_alpha,
            tail_x, tail_w, bound_tail_x,  bound_tail_w,   phi_lower,    diam_x,    diam_w,  max_speed};
  }

  static DiagnosticsRow from_values(std::span<const double> v) {
    if (v.size() != kColumns.size()) throw DataError("diagnostics row: wrong column count");
    DiagnosticsRow r;
    r.t = v[0];
    r.L = v[1];
    r.spatial_fluct = v[2];
    r.cohesion_drift = v[3];
    r.wc_dev = v[4];
    r.mom_x_D = v[5];
    r.mom_w_D = v[6];
    r.mom_exp_alpha = v[7];
    r.tail_x = v[8];
    r.tail_w = v[9];
    r.bound_tail_x = v[10];
    r.bound_tail_w = v[11];
    r.phi_lower = v[12];
    r.diam_x = v[13];
    r.diam_w = v[14];
    r.max_speed = v[15];
    return r;
  }
};

/// One fully populated row; tail masses are taken at R_x(t), R_w(t). Bound
/// columns are NaN when the matching initial moment is not attached.
inline DiagnosticsRow snapshot(const Ensemble& e, double t, const GaugeParams& g, const ReferenceState& ref,
                               LightSpeed c, double beta, const SpeedMapSolverOpts& opts = {}) {
  DiagnosticsRow r;
  r.t = t;
  auto cs = centers(e);
  r.L = detail::centered_second_moment(e.momenta(), e.size(), e.dim(), cs.w_c);
  r.spatial_fluct = detail::centered_second_moment(e.positions(), e.size(), e.dim(), cs.x_c);
  r.cohesion_drift = cohesion_drift(e, t, ref.w_c0, ref.x_c0, c, opts);
  r.wc_dev = distance(cs.w_c, ref.w_c0);
  r.x_c = std::move(cs.x_c);
  r.w_c = std::move(cs.w_c);
  r.mom_x_D = moment_x(e, g.D);
  r.mom_w_D = moment_w(e, g.D);
  r.mom_exp_alpha = moment_exp_w(e, g.alpha);
  r.tail_x = tail_mass_x(e, radius_x(t, g.gauge));
  r.tail_w = tail_mass_w(e, radius_w(t, g.gauge));
  const bool have = g.regime() == Regime::polynomial ? std::isfinite(g.moment_p0) : std::isfinite(g.moment_e0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.bound_tail_x = have ? tail_bound(t, g, c, TailSide::x) : nan;
  r.bound_tail_w = have ? tail_bound(t, g, c, TailSide::w) : nan;
  r.phi_lower = phi_lower(t, g.gauge, beta);
  const auto dm = support_diameters(e);
  r.diam_x = dm.diam_x;
  r.diam_w = dm.diam_w;
  r.max_speed = max_speed(e, c, opts);
  return r;
}

}  // namespace rkcs
