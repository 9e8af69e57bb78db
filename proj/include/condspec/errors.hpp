#pragma once

#include <stdexcept>
#include <string>

namespace condspec {

/// Invalid or unparseable job configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical stage could not meet its contract (non-Hermitian input,
/// convergence gate, diverging variational residual, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be read, parsed, or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace condspec
