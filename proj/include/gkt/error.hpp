#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gkt {

enum class ErrorKind {
  invalid_input,
  invalid_parameter,
  sample_too_small,
  degenerate_sample,
  invalid_layout,
  invalid_reference,
  calibration_unavailable,
  invalid_spec,
  invalid_setting,
  invalid_config,
  parse_error,
  unsupported_size,
  degenerate_regressor,
  io_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` carries the category so
/// callers (the CLI in particular) can map failures to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const char* what) {
  if (!condition) fail(kind, what);
}

}  // namespace gkt
