#pragma once

#include <stdexcept>
#include <string>

namespace dii {

// Bad shapes, malformed files, invalid parameters. The CLI maps these to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The numbers themselves went bad: degenerate metric, collapsed neighborhoods,
// every weight driven to zero. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dii
