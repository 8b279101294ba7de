// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkcs {

/// Argument outside the mathematical domain of a map (e.g. |v| >= c).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (size mismatch, point outside a ball, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative solver failed to converge; indicates a numerics bug.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or distribution spec.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data unusable for an analysis (non-positive samples in a log fit, corrupt CSV).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value or speed-limit violation during time integration.
class NumericError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit NumericError(const std::string& what, std::size_t atom = npos)
      : std::runtime_error(atom == npos ? what : what + " (atom " + std::to_string(atom) + ")"),
        atom_(atom) {}

  [[nodiscard]] std::size_t atom() const noexcept { return atom_; }

 private:
  std::size_t atom_;
};

}  // namespace rkcs
