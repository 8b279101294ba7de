// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rkcs/errors.hpp"

namespace rkcs {

/// N equal-mass atoms (x_i, w_i) in R^d x R^d, stored row-major.
class Ensemble {
 public:
  Ensemble() = default;

  Ensemble(std::size_t n, std::size_t dim) : n_(n), dim_(dim), x_(n * dim, 0.0), w_(n * dim, 0.0) {
    if (n == 0 || dim == 0) throw PreconditionError("Ensemble: n and dim must be >= 1");
  }

  Ensemble(std::size_t dim, std::vector<double> positions, std::vector<double> momenta)
      : dim_(dim), x_(std::move(positions)), w_(std::move(momenta)) {
    if (dim == 0 || x_.empty() || x_.size() % dim != 0 || x_.size() != w_.size()) {
      throw PreconditionError("Ensemble: positions and momenta must be non-empty N x d arrays");
    }
    n_ = x_.size() / dim;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] double weight() const noexcept { return 1.0 / static_cast<double>(n_); }

  [[nodiscard]] std::span<double> x(std::size_t i) noexcept { return {x_.data() + i * dim_, dim_}; }
  [[nodiscard]] std::span<const double> x(std::size_t i) const noexcept { return {x_.data() + i * dim_, dim_}; }
  [[nodiscard]] std::span<double> w(std::size_t i) noexcept { return {w_.data() + i * dim_, dim_}; }
  [[nodiscard]] std::span<const double> w(std::size_t i) const noexcept { return {w_.data() + i * dim_, dim_}; }

  [[nodiscard]] std::span<double> positions() noexcept { return x_; }
  [[nodiscard]] std::span<const double> positions() const noexcept { return x_; }
  [[nodiscard]] std::span<double> momenta() noexcept { return w_; }
  [[nodiscard]] std::span<const double> momenta() const noexcept { return w_; }

  [[nodiscard]] bool all_finite() const noexcept {
    for (double v : x_) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : w_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Ensemble&, const Ensemble&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> x_;
  std::vector<double> w_;
};

}  // namespace rkcs
