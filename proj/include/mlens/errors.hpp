#pragma once

#include <stdexcept>
#include <string>

namespace mlens {

/// Invalid configuration or parameter set; maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

class GridTooSmall : public ValidationError {
public:
    explicit GridTooSmall(const std::string& msg) : ValidationError(msg) {}
};

/// Numerical failure during a computation; maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Coarse pre-scan found the objective maximal at a bracket endpoint.
class NoInteriorMaximum : public NumericalError {
public:
    explicit NoInteriorMaximum(const std::string& msg) : NumericalError(msg) {}
};

}  // namespace mlens
