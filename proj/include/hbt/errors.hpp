#pragma once
#include <stdexcept>
#include <string>

namespace hbt {

/// Physics-domain violation: non-positive sizes, occupancy bounds,
/// unsupported geometry modes. CLI exit code 2.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Configuration problem: unknown key, missing key, unparsable value.
/// CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File read/write failure. CLI exit code 3.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Kernel failed validation (non-Hermitian, eigenvalue out of range).
class KernelError : public DomainError {
public:
  using DomainError::DomainError;
};

/// Correlation fit did not converge or lacks usable bins.
class FitError : public DomainError {
public:
  using DomainError::DomainError;
};

} // namespace hbt
