#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tajweed {

/// Error families. Each family maps to a distinct CLI exit code.
enum class ErrorCode {
  NotFound = 10,
  UnsupportedFormat,
  CorruptHeader,
  InvalidRate,
  TooShort = 20,
  WrongRate,
  DegenerateBank,
  TooFewVectors,
  InvalidConfig,
  DimensionMismatch = 30,
  SingleClass,
  NoConvergence,
  TooFewSamples,
  ConfigMismatch = 40,
  EmptyNegatives,
  MissingModel,
  ParseError = 50,
  StratumTooSmall,
  MissingStratum,
  IoError,
  UnknownRecord,
  InvalidTransition,
  VersionMismatch = 60,
  SchemaError,
  InvalidArgument = 70,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_name(code)) + ": " + what);
}

}  // namespace tajweed
