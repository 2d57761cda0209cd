#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bwretrieve {

enum class ErrorKind {
  InvalidConfiguration,
  InvalidInput,
  DegenerateEnsemble,
  SingularFactor,
  MissingOracle,
  InitializationFailure,
  Io,
};

const char* to_string(ErrorKind kind);

/// Base class for every error raised by the library. The kind maps onto the
/// CLI exit codes (configuration errors exit with 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Cholesky breakdown while whitening; `pivot` is the zero-based column at
/// which a nonpositive pivot appeared.
class DegenerateEnsembleError : public Error {
 public:
  DegenerateEnsembleError(std::ptrdiff_t pivot, double value);

  std::ptrdiff_t pivot() const noexcept { return pivot_; }
  double pivot_value() const noexcept { return value_; }

 private:
  std::ptrdiff_t pivot_;
  double value_;
};

class InitializationError : public Error {
 public:
  InitializationError(const std::string& what, double residual)
      : Error(ErrorKind::InitializationFailure, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace bwretrieve
