#pragma once

#include <stdexcept>
#include <string>

namespace nlvar {

/// Base class for every error the library raises. `DomainError` covers
/// model-level failures (exit code 1 in the CLI); `InputError` covers
/// malformed inputs and I/O (exit code 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

/// Schema violations carry the JSON path of the offending value.
class SchemaError : public InputError {
 public:
  SchemaError(std::string path, const std::string& what)
      : InputError(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class FamilyMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The image of pi is not a fixed r-dimensional subspace. `regime` is the
/// offending regime, or -1 when the intercept c leaves the common span.
class CrscViolation : public DomainError {
 public:
  CrscViolation(long regime, double residual, const std::string& what)
      : DomainError(what), regime_(regime), residual_(residual) {}
  long regime() const { return regime_; }
  double residual() const { return residual_; }

 private:
  long regime_;
  double residual_;
};

class NoRegimeAccepts : public DomainError {
 public:
  using DomainError::DomainError;
};

class NewtonDivergence : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotMember : public DomainError {
 public:
  using DomainError::DomainError;
};

class StationaryModel : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotOnAttractor : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotPositiveDefinite : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotOrthogonal : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace nlvar
