#pragma once

#include <stdexcept>
#include <string>

namespace gcsets {

// Bad inputs: malformed files, shape mismatches, out-of-range parameters.
// The CLI maps this category to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown: singular conditioning blocks, degenerate covariances,
// excessive resampling failures.  The CLI maps this category to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gcsets
