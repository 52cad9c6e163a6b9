#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace expconc {

// Bad argument values (nonpositive constants, malformed configs, ...).
struct parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Misuse of an operation (empty dataset, out-of-domain point, ...).
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A requested capability is absent (custom loss without Hessian, custom
// regularizer without prox, ...).
struct capability_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure while iterating (non-finite values, non-convergence).
// Carries the last iterate so callers can diagnose.
struct numeric_error : std::runtime_error {
  numeric_error(const std::string& what, std::vector<double> iterate = {})
      : std::runtime_error(what), last_iterate(std::move(iterate)) {}
  std::vector<double> last_iterate;
};

}  // namespace expconc
