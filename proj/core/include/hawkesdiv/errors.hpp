#pragma once

#include <stdexcept>
#include <string>

namespace hawkesdiv {

/// Invalid user-supplied configuration (parameters, grid spec, config file).
/// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime: solver non-convergence, non-finite
/// gradients, or a policy violating its output contract.
/// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hawkesdiv
