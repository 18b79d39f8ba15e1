#pragma once

#include <stdexcept>
#include <string>

namespace h2ds {

/// Invalid or inconsistent problem definition.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an argument that violates an operation's precondition.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Instance too large for the requested computation.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double final_span, long iterations)
        : std::runtime_error(what), final_span_(final_span), iterations_(iterations) {}

    double final_span() const noexcept { return final_span_; }
    long iterations() const noexcept { return iterations_; }

private:
    double final_span_;
    long iterations_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace h2ds
