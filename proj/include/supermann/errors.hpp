#pragma once

#include <stdexcept>
#include <string>

namespace supermann {

/// Invalid arguments or parameters supplied by the caller.
class UsageError : public std::invalid_argument {
public:
  explicit UsageError(const std::string &what) : std::invalid_argument(what) {}
};

/// A problem instance or operator could not be built from the given data.
class ConstructionError : public std::runtime_error {
public:
  explicit ConstructionError(const std::string &what) : std::runtime_error(what) {}
};

/// Raised by the opt-in finiteness checks when a NaN or Inf shows up.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace supermann
