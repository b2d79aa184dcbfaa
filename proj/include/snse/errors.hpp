#pragma once

#include <stdexcept>
#include <string>

namespace snse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidMesh : public Error {
 public:
  using Error::Error;
};

class PointOutsideDomain : public Error {
 public:
  using Error::Error;
};

/// Singular or failed factorization of a saddle-point system.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class NewtonDivergence : public Error {
 public:
  NewtonDivergence(const std::string& what, double last_residual, int step = -1)
      : Error(what), last_residual_(last_residual), step_(step) {}

  [[nodiscard]] double last_residual() const { return last_residual_; }
  [[nodiscard]] int step() const { return step_; }

 private:
  double last_residual_;
  int step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace snse
