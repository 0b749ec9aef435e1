#pragma once

#include <stdexcept>
#include <string>

namespace seqdisc {

// Process exit codes used by the command-line driver.
enum class ExitCode : int {
  kOk = 0,
  kParameter = 2,
  kCapacity = 3,
  kHarnessFault = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kParameter; }
};

/// Invalid argument, size, or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes that cannot be combined.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// API called out of order (e.g. backward without a forward pass).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A formula evaluated at a point where it is not defined.
class UndefinedPointError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced while checked mode is on.
class NumericError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kHarnessFault; }
};

/// Work would exceed a configured enumeration or memory cap.
class CapacityError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kCapacity; }
};

/// The experiment harness itself misbehaved (sanity check failed,
/// training diverged).
class HarnessFault : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kHarnessFault; }
};

}  // namespace seqdisc
