#pragma once

#include <stdexcept>
#include <string>

namespace fsolink {

// Bad user-supplied configuration (CLI maps this to exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A precondition or numerical-validity check failed during a simulation
// (CLI maps this to exit code 3).
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fsolink
