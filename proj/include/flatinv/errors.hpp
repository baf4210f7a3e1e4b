#pragma once

#include <stdexcept>
#include <string>

namespace flatinv {

/// Invalid grids, inconsistent configuration, bad arguments.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-convergence, divergence, undefined physical quantities.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double omega) : NumericalError(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flatinv
