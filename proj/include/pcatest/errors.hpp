#pragma once

#include <stdexcept>
#include <string>

namespace pcatest {

// Thrown for bad inputs: dimension mismatches, invalid grammar, precondition
// violations, infeasible configuration. CLI maps these to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for numerical failures: solver non-convergence, degenerate data,
// internal cross-checks. CLI maps these to exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcatest
