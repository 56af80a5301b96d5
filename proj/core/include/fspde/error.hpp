#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fspde {

enum class ErrorKind {
  Domain,        // argument outside the admissible range
  Resolution,    // grid cannot resolve the request (non-uniform, window too small, ...)
  GridMismatch,  // paths live on different grids
  Divergence,    // a discrete norm came out non-finite
  BlowUp,        // solver state became non-finite
  Budget,        // estimator could not reach the requested accuracy
  Condition,     // a structural condition on the coefficients failed
  Config,        // malformed or out-of-range experiment configuration
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace fspde
