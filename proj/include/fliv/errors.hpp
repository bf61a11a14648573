#pragma once

#include <stdexcept>
#include <string>

namespace fliv {

enum class ErrorKind {
  InvalidArgument,
  InvalidBasis,
  InvalidGrid,
  GridMismatch,
  Dimension,
  RankDeficient,
  Underdetermined,
  InsufficientData,
  AsymmetricInput,
  WeakInstrument,
  RatioDegenerate,
  InvalidCorrelation,
  Internal,
  Schema,
  RowError,
  EmptyCohort,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and the CLI's
// exit-code mapping) can react without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fliv
