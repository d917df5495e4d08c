#pragma once

#include <stdexcept>
#include <string>

namespace shruti {

// Bad configuration or malformed input files (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input violates a task precondition, e.g. MISSING tokens passed to a
// correction engine (CLI exit code 3).
class TaskError : public std::runtime_error {
public:
  explicit TaskError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace shruti
