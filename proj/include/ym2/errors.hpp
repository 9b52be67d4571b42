#pragma once

#include <stdexcept>
#include <string>

namespace ym2 {

// Error categories used across the library.  The CLI maps each category to a
// distinct exit code.
enum class ErrorCategory {
  argument,
  syntax,
  semantic,
  realizability,
  resource,
  numeric,
  solver,
  unsupported,
  underdetermined,
  cutoff,
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::argument: return "argument";
    case ErrorCategory::syntax: return "syntax";
    case ErrorCategory::semantic: return "semantic";
    case ErrorCategory::realizability: return "realizability";
    case ErrorCategory::resource: return "resource";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::unsupported: return "unsupported";
    case ErrorCategory::underdetermined: return "underdetermined";
    case ErrorCategory::cutoff: return "cutoff";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(std::string(to_string(cat)) + ": " + msg), cat_(cat) {}
  ErrorCategory category() const { return cat_; }

 private:
  ErrorCategory cat_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
  throw Error(c, msg);
}

}  // namespace ym2
