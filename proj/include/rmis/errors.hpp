#pragma once

#include <stdexcept>
#include <string>

namespace rmis {

// Bad or infeasible parameters (graph families, run configuration, CLI input).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed edge-list or config text.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A behavior broke an engine invariant (e.g. overwrote a committed output).
class EngineFault : public std::logic_error {
 public:
  explicit EngineFault(const std::string& what) : std::logic_error(what) {}
};

// A caller broke an operation precondition.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace rmis
