#pragma once

#include <stdexcept>
#include <string>

namespace sawec {

// Every failure the library reports carries a stable machine-readable code
// so the CLI can emit it as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class DegenerateGeometryError : public Error {
 public:
  explicit DegenerateGeometryError(const std::string& message)
      : Error("degenerate_geometry", message) {}
};

class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& message) : Error("consistency_error", message) {}
};

class SynchronizationError : public Error {
 public:
  explicit SynchronizationError(const std::string& message)
      : Error("synchronization_error", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace sawec
