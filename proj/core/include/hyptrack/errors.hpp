#pragma once

#include <stdexcept>
#include <string>

namespace hyptrack {

/// Invalid configuration value. `field()` names the offending field path
/// (e.g. "sensor.fov_half_angle") when known.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field.empty() ? what : field + ": " + what),
          field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed or inconsistent input data (frames, truth, reports).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: singular matrices, dynamics singularities, degenerate
/// normalizations.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-body dynamics evaluated too close to the central body.
class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Every candidate carried zero posterior mass.
class DegenerateUpdateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Exhaustive enumeration requested beyond the configured limits.
class LimitExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hyptrack
