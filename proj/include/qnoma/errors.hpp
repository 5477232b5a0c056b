#ifndef QNOMA_ERRORS_HPP
#define QNOMA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qnoma {

// Bad configuration or malformed input files. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Failure during a simulation, sweep, or model fit. Exit code 3 at the CLI.
class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qnoma

#endif  // QNOMA_ERRORS_HPP
