#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace layerflow {

/// Malformed or inconsistent triangulation.
class MeshError : public std::runtime_error {
 public:
  explicit MeshError(const std::string &what, std::ptrdiff_t index = -1)
      : std::runtime_error(what), index_(index) {}
  /// Offending triangle / edge / node index, or -1.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

/// Invalid run configuration or parameter set.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (e.g. negative depth).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Hard failure inside the time integration, carrying cell and time context.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string &what, std::ptrdiff_t cell, double time)
      : std::runtime_error(what + " (cell " + std::to_string(cell) + ", t = " +
                           std::to_string(time) + ")"),
        cell_(cell),
        time_(time) {}
  std::ptrdiff_t cell() const noexcept { return cell_; }
  double time() const noexcept { return time_; }

 private:
  std::ptrdiff_t cell_;
  double time_;
};

/// A scalar Newton solve that did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string &what, double residual, int iterations)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + " after " +
                           std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace layerflow
