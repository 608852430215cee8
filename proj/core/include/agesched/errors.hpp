#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace agesched {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent system configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Hazard/alpha queried at a processed-time value whose tail probability is zero.
class ZeroTailError : public Error {
public:
    using Error::Error;
};

/// A schedule decision violated capacity or buffer-occupancy constraints.
/// Signals a policy bug; never silently repaired.
class InfeasibleDecisionError : public Error {
public:
    using Error::Error;
};

/// An iterative solver exhausted its iteration budget (CLI exit code 4).
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, int iterations, double residual)
        : Error(what), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
};

/// Exhaustive-search oracle invoked on an instance above its size limit.
class TooLargeError : public Error {
public:
    using Error::Error;
};

/// Whittle-index policy requested on a system with non-geometric service.
class NotGeometricError : public Error {
public:
    using Error::Error;
};

/// A required precomputed artifact is absent or keyed to a different input
/// (CLI exit code 3).
class MissingArtifactError : public Error {
public:
    using Error::Error;
};

/// Process-wide sink for non-fatal diagnostics (hazard-saturation guards,
/// config advisories). Default prints "warning: ..." to stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);
void emit_warning(const std::string& message);

} // namespace agesched
