#pragma once

#include <stdexcept>
#include <string>

namespace cdsplit {

/// Invalid parameters or configuration (bad alpha, unknown method, d = 0, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// An API was called with arguments that do not fit the object (dimension
/// mismatch, wrong query type for a partition, empty input).
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

/// Malformed external data. The message names the offending row/column.
class IngestionError : public std::runtime_error {
 public:
  explicit IngestionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cdsplit
