#pragma once

#include <stdexcept>
#include <string>

namespace csa {

/// Invalid scenario, model, surface or session configuration. Reported before
/// any control tick runs; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fault raised while a session is executing (exit code 3).
class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema/version mismatch of a serialized document.
class VersionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace csa
