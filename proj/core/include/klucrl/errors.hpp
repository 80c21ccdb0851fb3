#pragma once

#include <stdexcept>
#include <string>

namespace klucrl {

/// Raised when a model violates a structural invariant (rows not on the
/// simplex, rewards outside [0,1], non-communicating dynamics, ...).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an iterative solver hits its sweep cap. Carries the span
/// (or residual) reached so callers can report how far off it was.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

} // namespace klucrl
