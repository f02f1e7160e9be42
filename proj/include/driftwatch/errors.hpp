#pragma once

#include <stdexcept>
#include <string>

namespace driftwatch {

// Bad or unreadable input data (files, stores, streams). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or arguments. CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation invoked in a state that does not allow it (e.g. classifying
// before any classifier exists, labeling an open window).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace driftwatch
