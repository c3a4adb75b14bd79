#pragma once

#include <stdexcept>
#include <string>

namespace meshflow {

enum class ErrorCategory {
  validation,   // bad arguments or inconsistent inputs
  parse,        // malformed text input
  format,       // malformed or unsupported binary input
  io,           // filesystem failure
  resource,     // guard against excessive memory/size
  integration,  // non-finite state inside an ODE solve
  divergence,   // optimizer blow-up
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::format: return "format";
    case ErrorCategory::io: return "io";
    case ErrorCategory::resource: return "resource";
    case ErrorCategory::integration: return "integration";
    case ErrorCategory::divergence: return "divergence";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(to_string(category)) + ": " + message),
        category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace meshflow
