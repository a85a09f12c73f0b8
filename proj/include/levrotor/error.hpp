#pragma once

#include <stdexcept>
#include <string>

namespace levrotor {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Domain,      // argument outside the operation's domain
  Geometry,    // invalid placement (edge singularity, intersecting bodies)
  Validation,  // config/schema problems
  Solver,      // non-convergence, singular systems, no equilibrium
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(ErrorKind::Geometry, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::string key = {})
      : Error(ErrorKind::Validation, what), key_(std::move(key)) {}

  /// Offending config key, empty when the error is not tied to one.
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0)
      : Error(ErrorKind::Solver, what), residual_(residual) {}

  [[nodiscard]] double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace levrotor
