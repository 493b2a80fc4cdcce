#pragma once

#include <stdexcept>
#include <string>

namespace dreach {

// Error taxonomy shared by all modules. Each failure class maps to one CLI
// exit code (see tools/discount_reach.cpp).

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input geometry or parameters (unordered bounds, bad radius, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Requested time step exceeds the CFL bound of the scheme.
class CflViolation : public Error {
public:
    CflViolation(double dt, double bound)
        : Error("time step " + std::to_string(dt) + " exceeds CFL bound " +
                std::to_string(bound)),
          dt_(dt), bound_(bound) {}

    double dt() const noexcept { return dt_; }
    double bound() const noexcept { return bound_; }

private:
    double dt_;
    double bound_;
};

/// A solver produced NaN or Inf at some node.
class NonFiniteValue : public Error {
public:
    using Error::Error;
};

/// Iterative computation did not meet its tolerance. Derived types carry the
/// partial result where one exists.
class NoConvergence : public Error {
public:
    using Error::Error;
};

/// A structural assumption of the stabilize-avoid construction fails on the
/// sampled grid (e.g. no R-CLVF sublevel set fits inside the target).
class AssumptionViolated : public Error {
public:
    using Error::Error;
};

/// Controller queried at a state where the value function is not finite.
class OutsideDomain : public Error {
public:
    using Error::Error;
};

/// Config file could not be parsed or validated.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An upstream artifact a command depends on is missing.
class MissingArtifact : public Error {
public:
    using Error::Error;
};

}  // namespace dreach
