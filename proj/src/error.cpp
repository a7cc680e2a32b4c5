#include "lexrec/error.hpp"

namespace lexrec {

const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kTraining: return "training error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kNoHypothesis: return "no hypothesis";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kInternal: return "internal error";
  }
  return "unknown error";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace lexrec
