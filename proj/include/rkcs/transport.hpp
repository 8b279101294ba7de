// SPDX-License-Identifier: Apache-2.0
//
// Exact p-Wasserstein distance between equal-size uniform empirical measures
// via a minimum-cost perfect matching.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "rkcs/dynamics.hpp"
#include "rkcs/ensemble.hpp"
#include "rkcs/errors.hpp"
#include "rkcs/parallel.hpp"
#include "rkcs/sampler.hpp"

namespace rkcs {

/// Row-major N x N matrix of |a_i - b_j|^p in extended precision.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<long double> entries;

  [[nodiscard]] long double operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
};

/// Atoms are rows of length `dim` in `a` and `b`.
inline CostMatrix build_cost_matrix(std::span<const double> a, std::span<const double> b, std::size_t dim,
                                    double p) {
  if (dim == 0 || a.size() % dim != 0 || a.size() != b.size() || a.empty()) {
    throw PreconditionError("wasserstein: atom sets must be non-empty and of equal size");
  }
  if (!(p >= 1.0)) throw PreconditionError("wasserstein: order p must be >= 1");
  CostMatrix C;
  C.n = a.size() / dim;
  C.entries.resize(C.n * C.n);
  const long double lp = p;
  default_pool().parallel_for(
      C.n,
      [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
          for (std::size_t j = 0; j < C.n; ++j) {
            long double s = 0.0L;
            for (std::size_t k = 0; k < dim; ++k) {
              const long double dv = static_cast<long double>(a[i * dim + k]) - b[j * dim + k];
              s += dv * dv;
            }
            C.entries[i * C.n + j] = p == 2.0 ? s : std::pow(std::sqrt(s), lp);
          }
        }
      },
      16);
  return C;
}

struct Assignment {
  std::vector<std::size_t> match;  // row i is matched to column match[i]
  long double cost = 0.0L;
};

/// Minimum-cost perfect matching by the shortest-augmenting-path Hungarian
/// method with potentials, O(N^3).
inline Assignment solve_assignment(const CostMatrix& C) {
  const std::size_t n = C.n;
  const long double inf = std::numeric_limits<long double>::infinity();
  std::vector<long double> u(n + 1, 0.0L), v(n + 1, 0.0L), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      long double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long double cur = C(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment res;
  res.match.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) res.match[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) res.cost += C(i, res.match[i]);
  return res;
}

/// W_p((1/N) sum delta_{a_i}, (1/N) sum delta_{b_i}).
inline double wasserstein_p(std::span<const double> a, std::span<const double> b, std::size_t dim, double p) {
  const auto C = build_cost_matrix(a, b, dim, p);
  const auto as = solve_assignment(C);
  const long double mean = as.cost / static_cast<long double>(C.n);
  return static_cast<double>(std::pow(std::max(mean, 0.0L), 1.0L / static_cast<long double>(p)));
}

/// Phase-space atoms (x_i, w_i) of an ensemble as rows of length 2d.
inline std::vector<double> phase_space_atoms(const Ensemble& e, std::span<const std::size_t> subset = {}) {
  const std::size_t d = e.dim();
  const std::size_t m = subset.empty() ? e.size() : subset.size();
  std::vector<double> out(m * 2 * d);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = subset.empty() ? r : subset[r];
    std::copy_n(e.x(i).begin(), d, out.begin() + r * 2 * d);
    std::copy_n(e.w(i).begin(), d, out.begin() + r * 2 * d + d);
  }
  return out;
}

inline constexpr std::size_t kWassersteinCap = 2048;

/// Seeded subset of `cap` distinct indices of [0, n), sorted ascending.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= cap) return idx;
  AtomRng rng(seed, 0, 7);
  for (std::size_t k = 0; k < cap; ++k) {
    const std::size_t r = k + static_cast<std::size_t>(rng() % (n - k));
    std::swap(idx[k], idx[r]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct WassersteinResult {
  double value = 0.0;
  std::size_t atoms_used = 0;
  bool subsampled = false;
};

/// W_p between two ensembles in phase space. Above `cap` atoms both ensembles
/// are restricted to the same seeded index subset.
inline WassersteinResult wasserstein_ensembles(const Ensemble& a, const Ensemble& b, double p,
                                               std::size_t cap = kWassersteinCap, std::uint64_t seed = 0) {
  if (a.size() != b.size() || a.dim() != b.dim()) throw PreconditionError("wasserstein: ensemble shape mismatch");
  WassersteinResult r;
  const auto idx = subsample_indices(a.size(), cap, seed);
  r.subsampled = idx.size() < a.size();
  r.atoms_used = idx.size();
  const auto pa = phase_space_atoms(a, r.subsampled ? std::span<const std::size_t>(idx) : std::span<const std::size_t>{});
  const auto pb = phase_space_atoms(b, r.subsampled ? std::span<const std::size_t>(idx) : std::span<const std::size_t>{});
  r.value = wasserstein_p(pa, pb, 2 * a.dim(), p);
  return r;
}

struct StabilityResult {
  double w0 = 0.0;
  double w_max = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
  std::vector<double> times;
  std::vector<double> distances;
};

/// Runs both ensembles to T under cfg and tracks W_p(mu_t, nu_t) at the
/// recorded times.
inline StabilityResult stability_ratio(const Ensemble& mu0, const Ensemble& nu0, SimConfig cfg, double T, double p) {
  if (mu0.size() != nu0.size() || mu0.dim() != nu0.dim()) {
    throw PreconditionError("stability_ratio: ensembles must have equal N and dim");
  }
  cfg.t_end = T;
  std::vector<Ensemble> traj_mu, traj_nu;
  std::vector<double> times;
  auto ra = integrate(mu0, cfg, relativistic_map(cfg), [&](std::size_t, double t, const Ensemble& e) {
    traj_mu.push_back(e);
    times.push_back(t);
  });
  if (ra.failure) throw NumericError(ra.failure->message, ra.failure->atom);
  auto rb = integrate(nu0, cfg, relativistic_map(cfg), [&](std::size_t, double, const Ensemble& e) {
    traj_nu.push_back(e);
  });
  if (rb.failure) throw NumericError(rb.failure->message, rb.failure->atom);
  StabilityResult res;
  res.times = times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    res.distances.push_back(wasserstein_ensembles(traj_mu[k], traj_nu[k], p).value);
  }
  res.w0 = res.distances.front();
  res.w_max = *std::max_element(res.distances.begin(), res.distances.end());
  if (res.w0 == 0.0) {
    res.degenerate = true;
  } else {
    res.ratio = res.w_max / res.w0;
  }
  return res;
}

}  // namespace rkcs
