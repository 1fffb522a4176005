#pragma once

#include <stdexcept>
#include <string>

namespace vaporsim {

// Bad or inconsistent user-supplied configuration. CLI maps this to exit 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A solver failed to converge or produced a non-finite result. CLI maps this
// to exit 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vaporsim
