// SPDX-License-Identifier: Apache-2.0
//
// Seeded sampling of initial measures into equal-weight ensembles, and the
// empirical phase-space moments M_p and M_e.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rkcs/ensemble.hpp"
#include "rkcs/errors.hpp"
#include "rkcs/parallel.hpp"
#include "rkcs/vecops.hpp"

namespace rkcs {

// An empty vector for a center, mean or point means the origin.

struct GaussianSpec {
  std::vector<double> mean;
  std::vector<double> sigma{1.0};  // one entry (isotropic) or one per axis
};

/// Isotropic multivariate Student-t: center + scale * g / sqrt(chi2_nu / nu).
struct StudentTSpec {
  double dof = 5.0;
  double scale = 1.0;
  std::vector<double> center;
};

/// Isotropic density proportional to exp(-rate |z - center|).
struct LaplaceSpec {
  double rate = 1.0;
  std::vector<double> center;
};

struct UniformBallSpec {
  double radius = 1.0;
  std::vector<double> center;
};

struct DiracSpec {
  std::vector<double> point;
};

struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> sigma{1.0};
};

struct GaussianMixtureSpec {
  std::vector<MixtureComponent> components;
};

using DistributionSpec =
    std::variant<GaussianSpec, StudentTSpec, LaplaceSpec, UniformBallSpec, DiracSpec, GaussianMixtureSpec>;

inline const char* kind_name(const DistributionSpec& s) {
  constexpr const char* names[] = {"gaussian", "student_t", "laplace", "uniform_ball", "dirac", "gaussian_mixture"};
  return names[s.index()];
}

/// SplitMix64 stream keyed by (seed, atom, stream); satisfies UniformRandomBitGenerator.
class AtomRng {
 public:
  using result_type = std::uint64_t;

  AtomRng(std::uint64_t seed, std::uint64_t atom, std::uint64_t stream) {
    state_ = mix(seed ^ mix(atom * 0x9e3779b97f4a7c15ULL + mix(stream + 0x632be59bd9b4e019ULL)));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

namespace detail {

inline void check_vec(const std::vector<double>& v, std::size_t dim, const std::string& what) {
  if (!v.empty() && v.size() != dim) {
    throw ConfigError(what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(dim));
  }
  for (double a : v) {
    if (!std::isfinite(a)) throw ConfigError(what + " must be finite");
  }
}

inline void check_sigma(const std::vector<double>& s, std::size_t dim, const std::string& what) {
  if (s.size() != 1 && s.size() != dim) throw ConfigError(what + " must have 1 or dim entries");
  for (double a : s) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError(what + " entries must be positive");
  }
}

inline double at(const std::vector<double>& v, std::size_t k) {
  if (v.empty()) return 0.0;
  return v.size() == 1 ? v[0] : v[k];
}

inline void gaussian_draw(const std::vector<double>& mean, const std::vector<double>& sigma, AtomRng& rng,
                          std::span<double> out) {
  std::normal_distribution<double> nd;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (mean.empty() ? 0.0 : mean[k]) + at(sigma, k) * nd(rng);
}

inline void unit_direction(AtomRng& rng, std::span<double> out) {
  std::normal_distribution<double> nd;
  for (;;) {
    for (double& v : out) v = nd(rng);
    const double r = norm(out);
    if (r > 1e-300) {
      for (double& v : out) v /= r;
      return;
    }
  }
}

inline void add_center(const std::vector<double>& center, std::span<double> out) {
  if (center.empty()) return;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += center[k];
}

struct Drawer {
  AtomRng& rng;
  std::span<double> out;

  void operator()(const GaussianSpec& s) const { gaussian_draw(s.mean, s.sigma, rng, out); }

  void operator()(const StudentTSpec& s) const {
    std::normal_distribution<double> nd;
    for (double& v : out) v = nd(rng);
    std::chi_squared_distribution<double> chi(s.dof);
    const double f = s.scale / std::sqrt(chi(rng) / s.dof);
    for (double& v : out) v *= f;
    add_center(s.center, out);
  }

  void operator()(const LaplaceSpec& s) const {
    // In polar form the radius of exp(-a|z|) in R^d is Gamma(d, 1/a).
    unit_direction(rng, out);
    std::gamma_distribution<double> gd(static_cast<double>(out.size()), 1.0 / s.rate);
    const double r = gd(rng);
    for (double& v : out) v *= r;
    add_center(s.center, out);
  }

  void operator()(const UniformBallSpec& s) const {
    unit_direction(rng, out);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const double r = s.radius * std::pow(ud(rng), 1.0 / static_cast<double>(out.size()));
    for (double& v : out) v *= r;
    add_center(s.center, out);
  }

  void operator()(const DiracSpec& s) const {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = s.point.empty() ? 0.0 : s.point[k];
  }

  void operator()(const GaussianMixtureSpec& s) const {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const double u = ud(rng);
    double acc = 0.0;
    std::size_t pick = s.components.size() - 1;
    for (std::size_t c = 0; c < s.components.size(); ++c) {
      acc += s.components[c].weight;
      if (u < acc) {
        pick = c;
        break;
      }
    }
    gaussian_draw(s.components[pick].mean, s.components[pick].sigma, rng, out);
  }
};

}  // namespace detail

/// Throws ConfigError if the spec is unusable in dimension dim. Student-t needs
/// dof > d_max so that the d_max-th moment is finite.
inline void validate(const DistributionSpec& spec, std::size_t dim, double d_max) {
  using detail::check_sigma;
  using detail::check_vec;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          check_vec(s.mean, dim, "gaussian.mean");
          check_sigma(s.sigma, dim, "gaussian.sigma");
        } else if constexpr (std::is_same_v<T, StudentTSpec>) {
          if (!(s.dof > d_max)) {
            throw ConfigError("student_t.dof = " + std::to_string(s.dof) + " must exceed D_max = " +
                              std::to_string(d_max));
          }
          if (!(s.scale > 0.0) || !std::isfinite(s.scale)) throw ConfigError("student_t.scale must be positive");
          check_vec(s.center, dim, "student_t.center");
        } else if constexpr (std::is_same_v<T, LaplaceSpec>) {
          if (!(s.rate > 0.0) || !std::isfinite(s.rate)) throw ConfigError("laplace.rate must be positive");
          check_vec(s.center, dim, "laplace.center");
        } else if constexpr (std::is_same_v<T, UniformBallSpec>) {
          if (!(s.radius > 0.0) || !std::isfinite(s.radius)) throw ConfigError("uniform_ball.radius must be positive");
          check_vec(s.center, dim, "uniform_ball.center");
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          check_vec(s.point, dim, "dirac.point");
        } else {
          if (s.components.empty()) throw ConfigError("gaussian_mixture needs at least one component");
          double total = 0.0;
          for (const auto& c : s.components) {
            if (!(c.weight > 0.0)) throw ConfigError("gaussian_mixture weights must be positive");
            check_vec(c.mean, dim, "gaussian_mixture.mean");
            check_sigma(c.sigma, dim, "gaussian_mixture.sigma");
            total += c.weight;
          }
          if (std::abs(total - 1.0) > 1e-12) throw ConfigError("gaussian_mixture weights must sum to 1");
        }
      },
      spec);
}

/// Draws one point for atom `atom` of stream `stream`.
inline void sample_point(const DistributionSpec& spec, std::uint64_t seed, std::uint64_t atom, std::uint64_t stream,
                         std::span<double> out) {
  AtomRng rng(seed, atom, stream);
  std::visit(detail::Drawer{rng, out}, spec);
}

/// Positions from spec_x, momenta from spec_w. Atom i depends only on (seed, i).
inline Ensemble sample_ensemble(const DistributionSpec& spec_x, const DistributionSpec& spec_w, std::size_t n,
                                std::size_t dim, std::uint64_t seed,
                                double d_max = -std::numeric_limits<double>::infinity()) {
  if (n == 0 || dim == 0) throw PreconditionError("sample_ensemble: n and dim must be >= 1");
  validate(spec_x, dim, d_max);
  validate(spec_w, dim, d_max);
  Ensemble e(n, dim);
  default_pool().parallel_for(
      n,
      [&](std::size_t b, std::size_t end) {
        for (std::size_t i = b; i < end; ++i) {
          sample_point(spec_x, seed, i, 0, e.x(i));
          sample_point(spec_w, seed, i, 1, e.w(i));
        }
      },
      256);
  return e;
}

/// (1/N) sum (|x_i|^D + |w_i|^D)
inline double empirical_moment_p(const Ensemble& e, double order) {
  if (!(order >= 0.0)) throw PreconditionError("empirical_moment_p: order must be >= 0");
  CompensatedSum s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    s.add(std::pow(norm(e.x(i)), order) + std::pow(norm(e.w(i)), order));
  }
  return s.value() * e.weight();
}

/// (1/N) sum exp(alpha (|x_i| + |w_i|))
inline double empirical_moment_exp(const Ensemble& e, double alpha) {
  if (!(alpha > 0.0)) throw PreconditionError("empirical_moment_exp: alpha must be > 0");
  const double cap = std::log(std::numeric_limits<double>::max());
  CompensatedSum s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double a = alpha * (norm(e.x(i)) + norm(e.w(i)));
    if (!(a <= cap)) throw NumericError("empirical_moment_exp: exponent overflow", i);
    s.add(std::exp(a));
  }
  const double v = s.value() * e.weight();
  if (!std::isfinite(v)) throw NumericError("empirical_moment_exp: sum overflow");
  return v;
}

}  // namespace rkcs
