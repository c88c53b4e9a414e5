#pragma once

#include <stdexcept>
#include <string>

namespace subflow {

// Raised by config parsing; `path` is a JSON-pointer-like location ("/wells/2/control").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Numerical failure (linear solver stalled, non-finite state, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, int iterations, double relative_residual)
      : NumericalError(what), iterations_(iterations), relative_residual_(relative_residual) {}
  int iterations() const noexcept { return iterations_; }
  double relative_residual() const noexcept { return relative_residual_; }

 private:
  int iterations_;
  double relative_residual_;
};

}  // namespace subflow
