#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hetdist {

enum class ErrorKind {
  Infeasible,
  MaskViolation,
  NonFinite,
  TooSmall,
  DimError,
  MissingTheta,
  DegenerateRow,
  ZeroBandwidth,
  ZeroDegree,
  ConvergenceFailure,
  ShapeMismatch,
  OutOfRange,
  NonPositive,
  EmptyRow,
  ParseError,
  DimensionMismatch,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Error carrying the offending row/observation index.
class IndexedError : public Error {
 public:
  IndexedError(ErrorKind kind, long index, const std::string& what)
      : Error(kind, what + " (index " + std::to_string(index) + ")"), index_(index) {}

  long index() const noexcept { return index_; }

 private:
  long index_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::MaskViolation: return "MaskViolation";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::DimError: return "DimError";
    case ErrorKind::MissingTheta: return "MissingTheta";
    case ErrorKind::DegenerateRow: return "DegenerateRow";
    case ErrorKind::ZeroBandwidth: return "ZeroBandwidth";
    case ErrorKind::ZeroDegree: return "ZeroDegree";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::EmptyRow: return "EmptyRow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace hetdist
