#pragma once

#include <stdexcept>
#include <string>

namespace holofield {

enum class ErrorKind {
  validation,      // bad arguments or configuration
  io,              // missing/unreadable/unwritable files
  corruption,      // file exists but content is malformed or truncated
  config_mismatch, // dataset files disagree with the manifest configuration
  placement,       // scene generation exhausted its rejection budget
  geometry,        // tiling geometry does not divide evenly
  range,           // value outside a quantizer range
  domain,          // mathematical domain error
  degenerate,      // constant input where a range is required
  internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::io: return "io";
    case ErrorKind::corruption: return "corruption";
    case ErrorKind::config_mismatch: return "config-mismatch";
    case ErrorKind::placement: return "placement";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::range: return "range";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace holofield
