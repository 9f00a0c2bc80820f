#pragma once
#include <stdexcept>
#include <string>

namespace cslab {

/// A state or argument violates a structural precondition (bad dimension,
/// non-finite data, overlapping clusters, ...).
struct InvalidState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A user-facing configuration is malformed or inconsistent.
struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The requested quantity is not defined for this domain/force mode.
struct Unsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The numerical computation left the representable range; carries the
/// simulation time at which it happened.
struct NumericalBlowup : std::runtime_error {
    NumericalBlowup(const std::string& msg, double t)
        : std::runtime_error(msg), time(t) {}
    double time;
};

} // namespace cslab
