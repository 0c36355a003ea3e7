#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace balkwise {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments; detected before any computation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Parameter vector outside the parameter box.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The simulated queue cannot leave the empty state.
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: truncation, singular information, no data.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace balkwise
