#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

/// Invalid parameters, config files, or CLI flags. CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Failures during integration or analysis. CLI maps this to exit code 2.
struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A second moment left the positive domain; the step size is too large
/// for the parameter regime. Carries the failing time once known.
struct NonPositiveVariance : SimulationError {
    explicit NonPositiveVariance(const std::string& msg, double time = -1.0)
        : SimulationError(msg), time(time) {}
    double time;
};

/// Hysteresis curve too short or without a zero crossing of the voltage proxy.
struct DegenerateCurve : SimulationError {
    using SimulationError::SimulationError;
};

}  // namespace qmem
