#pragma once

#include <stdexcept>
#include <string>

namespace lexrec {

enum class ErrorKind {
  kInput,         // malformed or out-of-range input data
  kParameter,     // invalid configuration value
  kTraining,      // model cannot be (re)estimated from the given data
  kNumeric,       // NaN or otherwise broken arithmetic
  kNoHypothesis,  // recognition produced no finite-cost reading
  kEvaluation,    // run output does not cover the key
  kIo,            // file could not be read or written
  kInternal,      // broken invariant inside the library
};

const char* error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace lexrec
