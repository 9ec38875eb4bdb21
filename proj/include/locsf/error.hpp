#pragma once

#include <stdexcept>
#include <string>

namespace locsf {

enum class ErrorKind {
  invalid_argument,   // malformed input that never reaches a numerical routine
  config,             // configuration validation failure
  singular_point,     // evaluation inside a declared singular region
  boundary_stencil,   // stencil needs a neighbour that does not exist
  dimension_cap,      // Fock space or polynomial exceeds its configured cap
  numerical,          // integration / extrapolation / conditioning failure
  io,
};

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

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace locsf
