#pragma once

#include <stdexcept>
#include <string>

namespace xrisk {

enum class ErrorKind {
  degenerate_labels,
  configuration,
  shape,
  parse,
  numeric_domain,
  batch_composition,
  out_of_range,
  io,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::degenerate_labels: return "degenerate-labels";
    case ErrorKind::configuration:     return "configuration";
    case ErrorKind::shape:             return "shape";
    case ErrorKind::parse:             return "parse";
    case ErrorKind::numeric_domain:    return "numeric-domain";
    case ErrorKind::batch_composition: return "batch-composition";
    case ErrorKind::out_of_range:      return "out-of-range";
    case ErrorKind::io:                return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace xrisk
