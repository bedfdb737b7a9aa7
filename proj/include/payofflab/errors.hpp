#pragma once

#include <stdexcept>
#include <string>

namespace payofflab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad input: out-of-range probability, non-finite payoff, malformed flag.
class ValidationError : public Error {
public:
  using Error::Error;
};

// Parameters admit no strategy inside the unit hypercube.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

// Closed-form payoff is undefined because the chain has several
// stationary distributions.
class DegenerateChainError : public Error {
public:
  using Error::Error;
};

class DivisionByZeroError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

}  // namespace payofflab
