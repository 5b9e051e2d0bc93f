#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtdemand {

enum class ErrorKind {
  NonNegativeSlope,
  AllPricesEqual,
  SingularDesign,
  InsufficientTasks,
  DimensionMismatch,
  EmptyTrainSet,
  OracleUnavailable,
  MalformedRow,
  MissingColumn,
  EmptyInput,
  InvalidConfig,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonNegativeSlope: return "NonNegativeSlope";
    case ErrorKind::AllPricesEqual: return "AllPricesEqual";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::InsufficientTasks: return "InsufficientTasks";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorKind::OracleUnavailable: return "OracleUnavailable";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mtdemand
