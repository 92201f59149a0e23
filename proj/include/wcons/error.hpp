#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wcons {

enum class ErrorCode {
  NonFinite,
  NegativeWeight,
  WeightSumMismatch,
  NonPositiveVariance,
  NonMonotoneQuantiles,
  OutOfDomain,
  GridMismatch,
  LengthMismatch,
  DimensionMismatch,
  NotSPD,
  NoConvergence,
  UnsupportedOrder,
  TooLarge,
  SizeMismatch,
  SparsityMismatch,
  RepresentationMismatch,
  EigenFailure,
  InsufficientData,
  EmptyData,
  SyntaxError,
  SchemaError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure in the library surfaces as this exception. `code()` is the
/// machine-readable kind; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Scenario/measure parse failure. `cause` is the forwarded validation code
/// when `code() == ValidationError`; `where` is a line number or field path.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::string where, const std::string& detail,
             ErrorCode cause = ErrorCode::ValidationError)
      : Error(code, where + ": " + detail), where_(std::move(where)), cause_(cause) {}

  const std::string& where() const noexcept { return where_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::string where_;
  ErrorCode cause_;
};

}  // namespace wcons
