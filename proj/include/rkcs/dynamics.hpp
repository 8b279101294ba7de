// SPDX-License-Identifier: Apache-2.0
//
// Fixed-step RK4 integration of the relativistic Cucker-Smale particle
// system and of its classical counterpart.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rkcs/bounds.hpp"
#include "rkcs/diagnostics.hpp"
#include "rkcs/ensemble.hpp"
#include "rkcs/errors.hpp"
#include "rkcs/kernel.hpp"
#include "rkcs/parallel.hpp"
#include "rkcs/relkin.hpp"
#include "rkcs/sampler.hpp"
#include "rkcs/vecops.hpp"

namespace rkcs {

struct SimConfig {
  LightSpeed c{1.0};
  double beta = 0.0;
  double kappa = 1.0;
  double dt = 1e-2;
  double t_end = 1.0;
  std::size_t record_every = 1;
  SpeedMapSolverOpts solver{};

  void validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be >= 0");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
    if (!(t_end == 0.0 || t_end >= dt) || !std::isfinite(t_end)) throw ConfigError("t_end must be 0 or >= dt");
    if (record_every == 0) throw ConfigError("record_every must be >= 1");
    solver.validate();
    (void)step_count();
  }

  /// Number of steps; t_end must be an integer multiple of dt.
  [[nodiscard]] std::size_t step_count() const {
    const double r = t_end / dt;
    const double n = std::round(r);
    if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) throw ConfigError("t_end must be an integer multiple of dt");
    return static_cast<std::size_t>(n);
  }
};

/// Default step 1e-2 min(1, 1/kappa).
inline double default_dt(double kappa) { return 1e-2 * std::min(1.0, kappa > 0.0 ? 1.0 / kappa : 1.0); }

struct ForceField {
  std::size_t dim = 0;
  std::vector<double> accel;

  [[nodiscard]] std::span<const double> at(std::size_t i) const { return {accel.data() + i * dim, dim}; }
};

// ---------------------------------------------------------------------------
// Velocity maps

/// v = w / F~(|w|), with the speed limit checked for every atom.
struct RelativisticVelocity {
  LightSpeed c{1.0};
  SpeedMapSolverOpts opts{};

  void operator()(std::span<const double> w, std::size_t n, std::size_t d, std::span<double> v,
                  ThreadPool& pool) const {
    pool.parallel_for(
        n,
        [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) {
            const auto wi = w.subspan(i * d, d);
            const double m = norm(wi);
            if (!std::isfinite(m)) throw NumericError("non-finite momentum", i);
            const double inv = 1.0 / momentum_factor_tilde(m, c, opts);
            double s2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
              v[i * d + k] = wi[k] * inv;
              s2 += v[i * d + k] * v[i * d + k];
            }
            if (!(std::sqrt(s2) < c.value())) throw NumericError("speed limit violated", i);
          }
        },
        512);
  }
};

/// Classical system: momenta are velocities.
struct ClassicalVelocity {
  void operator()(std::span<const double> w, std::size_t n, std::size_t d, std::span<double> v, ThreadPool&) const {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        if (!std::isfinite(w[i * d + k])) throw NumericError("non-finite velocity", i);
        v[i * d + k] = w[i * d + k];
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Pairwise alignment force

/// accel_i = (kappa/N) sum_j phi(|x_i - x_j|)(v_j - v_i).
///
/// Atoms are split into blocks of kBlock. Every block pair (I <= J) evaluates
/// its phi tile once and writes the contribution of J to the targets in I and
/// of I to the targets in J into a per-(source block, target) slot. The slots
/// of each target are then combined over source blocks in ascending order with
/// compensated summation. Every slot has a fixed owner tile and a fixed
/// summation order, so results do not depend on the thread count.
class PairwiseForce {
 public:
  static constexpr std::size_t kBlock = 64;

  void compute(std::span<const double> x, std::span<const double> v, std::size_t n, std::size_t d, double beta,
               double kappa, std::span<double> accel, ThreadPool& pool) {
    if (x.size() != n * d || v.size() != n * d || accel.size() != n * d) {
      throw PreconditionError("alignment force: array size mismatch");
    }
    if (n == 1 || kappa == 0.0) {
      std::fill(accel.begin(), accel.end(), 0.0);
      return;
    }
    const std::size_t nb = (n + kBlock - 1) / kBlock;
    const std::size_t np = nb * kBlock;
    X_.assign(d * np, 0.0);
    V_.assign(d * np, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        X_[k * np + i] = x[i * d + k];
        V_[k * np + i] = v[i * d + k];
      }
    }
    partial_.assign(nb * n * d, 0.0);
    pairs_.clear();
    for (std::size_t I = 0; I < nb; ++I) {
      for (std::size_t J = I; J < nb; ++J) pairs_.emplace_back(I, J);
    }
    const double expo = -0.5 * beta;
    pool.parallel_for(pairs_.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t t = b; t < e; ++t) tile(pairs_[t].first, pairs_[t].second, n, np, d, expo);
    });
    const double scale = kappa / static_cast<double>(n);
    pool.parallel_for(
        n,
        [&](std::size_t b, std::size_t e) {
          for (std::size_t i = b; i < e; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
              CompensatedSum s;
              for (std::size_t J = 0; J < nb; ++J) s.add(partial_[(J * n + i) * d + k]);
              const double a = scale * s.value();
              if (!std::isfinite(a)) throw NumericError("non-finite alignment force", i);
              accel[i * d + k] = a;
            }
          }
        },
        256);
  }

 private:
  void tile(std::size_t I, std::size_t J, std::size_t n, std::size_t np, std::size_t d, double expo) {
    switch (d) {
      case 1:
        return tile_impl<1>(I, J, n, np, d, expo);
      case 2:
        return tile_impl<2>(I, J, n, np, d, expo);
      case 3:
        return tile_impl<3>(I, J, n, np, d, expo);
      default:
        return tile_impl<0>(I, J, n, np, d, expo);
    }
  }

  // Dim is the compile-time dimension, or 0 for a runtime d up to kMaxDim.
  template <std::size_t Dim>
  void tile_impl(std::size_t I, std::size_t J, std::size_t n, std::size_t np, std::size_t d_rt, double expo) {
    constexpr std::size_t B = kBlock;
    constexpr std::size_t kMaxDim = 16;
    const std::size_t d = Dim == 0 ? d_rt : Dim;
    if (d > kMaxDim) throw PreconditionError("alignment force: dimension above 16 not supported");
    const std::size_t i0 = I * B;
    const std::size_t j0 = J * B;
    const bool mirror = I != J;

    alignas(64) double mask[B];
    alignas(64) double col[kMaxDim][B];
    for (std::size_t b = 0; b < B; ++b) mask[b] = j0 + b < n ? 1.0 : 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t b = 0; b < B; ++b) col[k][b] = 0.0;
    }
    const double* xj[kMaxDim];
    const double* vj[kMaxDim];
    for (std::size_t k = 0; k < d; ++k) {
      xj[k] = X_.data() + k * np + j0;
      vj[k] = V_.data() + k * np + j0;
    }

    for (std::size_t a = 0; a < B && i0 + a < n; ++a) {
      double xa[kMaxDim];
      double va[kMaxDim];
      for (std::size_t k = 0; k < d; ++k) {
        xa[k] = X_[k * np + i0 + a];
        va[k] = V_[k * np + i0 + a];
      }
      alignas(64) double phi[B];
      for (std::size_t b = 0; b < B; ++b) phi[b] = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double* xk = xj[k];
        const double xak = xa[k];
        for (std::size_t b = 0; b < B; ++b) {
          const double dx = xk[b] - xak;
          phi[b] += dx * dx;
        }
      }
      if (expo == 0.0) {
        for (std::size_t b = 0; b < B; ++b) phi[b] = mask[b];
      } else {
        for (std::size_t b = 0; b < B; ++b) phi[b] = mask[b] * detail::pow_ge1(1.0 + phi[b], expo);
      }
      alignas(64) double lane[kMaxDim][8];
      for (std::size_t k = 0; k < d; ++k) {
        const double* vk = vj[k];
        const double vak = va[k];
        double* ck = col[k];
        double* lk = lane[k];
        for (std::size_t l = 0; l < 8; ++l) lk[l] = 0.0;
        for (std::size_t b0 = 0; b0 < B; b0 += 8) {
          for (std::size_t l = 0; l < 8; ++l) {
            const double f = phi[b0 + l] * (vk[b0 + l] - vak);
            lk[l] += f;
            ck[b0 + l] -= f;
          }
        }
      }
      for (std::size_t k = 0; k < d; ++k) {
        const double* L = lane[k];
        partial_[(J * n + i0 + a) * d + k] = ((L[0] + L[1]) + (L[2] + L[3])) + ((L[4] + L[5]) + (L[6] + L[7]));
      }
    }
    if (!mirror) return;
    for (std::size_t b = 0; b < B && j0 + b < n; ++b) {
      for (std::size_t k = 0; k < d; ++k) partial_[(I * n + j0 + b) * d + k] = col[k][b];
    }
  }

  std::vector<double> X_;
  std::vector<double> V_;
  std::vector<double> partial_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

// ---------------------------------------------------------------------------
// RK4

template <class VelocityMap>
class Rk4Integrator {
 public:
  Rk4Integrator(const SimConfig& cfg, VelocityMap vel, ThreadPool& pool = default_pool())
      : cfg_(cfg), vel_(std::move(vel)), pool_(pool) {}

  /// Velocities of `w` into v_ and the alignment force at (x, v_) into a.
  void rhs(std::span<const double> x, std::span<const double> w, std::size_t n, std::size_t d, std::span<double> v,
           std::span<double> a) {
    vel_(w, n, d, v, pool_);
    force_.compute(x, v, n, d, cfg_.beta, cfg_.kappa, a, pool_);
  }

  ForceField force(const Ensemble& e) {
    const std::size_t m = e.size() * e.dim();
    v_.resize(m);
    ForceField f{e.dim(), std::vector<double>(m)};
    rhs(e.positions(), e.momenta(), e.size(), e.dim(), v_, f.accel);
    return f;
  }

  /// One classical four-stage Runge-Kutta step, in place.
  void step(Ensemble& e) {
    const std::size_t n = e.size();
    const std::size_t d = e.dim();
    const std::size_t m = n * d;
    const double h = cfg_.dt;
    auto x = e.positions();
    auto w = e.momenta();
    for (auto* b : {&v_, &a_, &xs_, &ws_, &sx_, &sw_}) b->resize(m);

    rhs(x, w, n, d, v_, a_);
    for (std::size_t i = 0; i < m; ++i) {
      sx_[i] = v_[i];
      sw_[i] = a_[i];
      xs_[i] = x[i] + 0.5 * h * v_[i];
      ws_[i] = w[i] + 0.5 * h * a_[i];
    }
    rhs(xs_, ws_, n, d, v_, a_);
    for (std::size_t i = 0; i < m; ++i) {
      sx_[i] += 2.0 * v_[i];
      sw_[i] += 2.0 * a_[i];
      xs_[i] = x[i] + 0.5 * h * v_[i];
      ws_[i] = w[i] + 0.5 * h * a_[i];
    }
    rhs(xs_, ws_, n, d, v_, a_);
    for (std::size_t i = 0; i < m; ++i) {
      sx_[i] += 2.0 * v_[i];
      sw_[i] += 2.0 * a_[i];
      xs_[i] = x[i] + h * v_[i];
      ws_[i] = w[i] + h * a_[i];
    }
    rhs(xs_, ws_, n, d, v_, a_);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += h / 6.0 * (sx_[i] + v_[i]);
      w[i] += h / 6.0 * (sw_[i] + a_[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        if (!std::isfinite(x[i * d + k]) || !std::isfinite(w[i * d + k])) {
          throw NumericError("non-finite state after step", i);
        }
      }
    }
    // Post-step speed check on the new momenta.
    vel_(w, n, d, v_, pool_);
  }

  [[nodiscard]] const SimConfig& config() const noexcept { return cfg_; }

 private:
  SimConfig cfg_;
  VelocityMap vel_;
  ThreadPool& pool_;
  PairwiseForce force_;
  std::vector<double> v_, a_, xs_, ws_, sx_, sw_;
};

inline RelativisticVelocity relativistic_map(const SimConfig& cfg) { return {cfg.c, cfg.solver}; }

inline ForceField alignment_force(const Ensemble& e, const SimConfig& cfg) {
  Rk4Integrator integ(cfg, relativistic_map(cfg));
  return integ.force(e);
}

inline ForceField classical_force(const Ensemble& e, const SimConfig& cfg) {
  Rk4Integrator integ(cfg, ClassicalVelocity{});
  return integ.force(e);
}

inline Ensemble step_rk4(const Ensemble& e, const SimConfig& cfg) {
  Ensemble out = e;
  Rk4Integrator integ(cfg, relativistic_map(cfg));
  integ.step(out);
  return out;
}

inline Ensemble classical_step_rk4(const Ensemble& e, const SimConfig& cfg) {
  Ensemble out = e;
  Rk4Integrator integ(cfg, ClassicalVelocity{});
  integ.step(out);
  return out;
}

// ---------------------------------------------------------------------------
// Drivers

/// Called at t = 0, at every record_every-th step and after the final step.
using RecordHook = std::function<void(std::size_t step, double t, const Ensemble&)>;

struct IntegrationFailure {
  std::string message;
  double t = 0.0;  // time of the last completed step
  std::size_t atom = NumericError::npos;
};

struct IntegrationResult {
  Ensemble final_state;  // after a failure, the state of the last completed step
  std::optional<IntegrationFailure> failure;
};

template <class VelocityMap>
IntegrationResult integrate(const Ensemble& e0, const SimConfig& cfg, VelocityMap vel, const RecordHook& hook) {
  cfg.validate();
  const std::size_t steps = cfg.step_count();
  IntegrationResult res{e0, std::nullopt};
  Rk4Integrator integ(cfg, std::move(vel));
  if (hook) hook(0, 0.0, res.final_state);
  Ensemble last = e0;
  for (std::size_t s = 1; s <= steps; ++s) {
    try {
      integ.step(res.final_state);
    } catch (const NumericError& err) {
      res.failure = IntegrationFailure{err.what(), static_cast<double>(s - 1) * cfg.dt, err.atom()};
      res.final_state = std::move(last);
      return res;
    }
    std::copy(res.final_state.positions().begin(), res.final_state.positions().end(), last.positions().begin());
    std::copy(res.final_state.momenta().begin(), res.final_state.momenta().end(), last.momenta().begin());
    if (hook && (s % cfg.record_every == 0 || s == steps)) hook(s, static_cast<double>(s) * cfg.dt, res.final_state);
  }
  return res;
}

/// Attaches M_p(mu0, D) and M_e(mu0, alpha) for the regime in use.
inline GaugeParams attach_moments(GaugeParams g, const Ensemble& e0) {
  if (g.regime() == Regime::polynomial) {
    if (!std::isfinite(g.moment_p0)) g.moment_p0 = empirical_moment_p(e0, g.D);
  } else {
    if (!std::isfinite(g.moment_e0)) g.moment_e0 = empirical_moment_exp(e0, g.alpha);
  }
  return g;
}

struct SimulationResult {
  std::vector<DiagnosticsRow> rows;
  Ensemble final_state;
  GaugeParams gauges;
  std::optional<IntegrationFailure> failure;
};

/// Relativistic run with one diagnostics row per recorded time. On a numeric
/// failure the rows recorded so far are returned together with the failure.
inline SimulationResult simulate(const Ensemble& e0, const SimConfig& cfg, const GaugeParams& gauges,
                                 const RecordHook& extra = {}) {
  SimulationResult out;
  out.gauges = attach_moments(gauges, e0);
  const ReferenceState ref = reference_of(e0);
  auto hook = [&](std::size_t step, double t, const Ensemble& e) {
    out.rows.push_back(snapshot(e, t, out.gauges, ref, cfg.c, cfg.beta, cfg.solver));
    if (extra) extra(step, t, e);
  };
  auto res = integrate(e0, cfg, relativistic_map(cfg), hook);
  out.final_state = std::move(res.final_state);
  out.failure = std::move(res.failure);
  return out;
}

inline IntegrationResult simulate_classical(const Ensemble& e0, const SimConfig& cfg, const RecordHook& hook = {}) {
  return integrate(e0, cfg, ClassicalVelocity{}, hook);
}

}  // namespace rkcs
