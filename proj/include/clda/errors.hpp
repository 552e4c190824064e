#pragma once

#include <stdexcept>
#include <string>

namespace clda {

// Bad user input: malformed files, schema violations, degenerate columns.
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during estimation (non-convergence, loss of definiteness).
// The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace clda
