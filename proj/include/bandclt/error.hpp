#pragma once

#include <stdexcept>
#include <string>

namespace bandclt {

enum class ErrorKind {
    InvalidSpec,
    InvalidArgument,
    NumericInput,
    KernelSingularity,
    Accuracy,
    InsufficientData,
    ReplicateFailure,
    Parse,
    Validation,
    Io,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is
/// machine-readable and ends up in the CLI's error JSON.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Raised when a numerical procedure cannot certify its own error estimate.
class AccuracyError : public Error {
  public:
    AccuracyError(const std::string& message, double estimate)
        : Error(ErrorKind::Accuracy, message), estimate_(estimate) {}

    double estimate() const noexcept { return estimate_; }

  private:
    double estimate_;
};

/// Configuration constraint violation tied to a named field.
class ValidationError : public Error {
  public:
    ValidationError(std::string field, const std::string& message)
        : Error(ErrorKind::Validation, message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

}  // namespace bandclt
