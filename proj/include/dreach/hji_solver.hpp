#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "dreach/dynamics.hpp"
#include "dreach/grid.hpp"
#include "dreach/level_set.hpp"

namespace dreach {

struct SolverConfig {
    double gamma = 0.1;            // discount rate (1/time)
    double cfl_factor = 0.8;       // in (0, 1]
    double convergence_tol = 1e-3; // sup-norm change per unit time
    double max_horizon = 50.0;     // longest time-to-go marched
    DerivativeOrder derivative_order = DerivativeOrder::first;
    NumericalHamiltonian scheme = NumericalHamiltonian::lax_friedrichs;
    double snapshot_interval = 0.5;
    std::size_t convergence_window = 10;  // consecutive steps below tolerance
    bool keep_snapshots = true;

    bool operator==(const SolverConfig&) const = default;
};

/// Throws DomainError on out-of-range settings.
void validate(const SolverConfig& cfg);

/// W(x, T) = max{ell, c, v0}; v0 omitted when absent.
ScalarField terminal_condition(const ScalarField& ell, const ScalarField& c,
                               const std::optional<ScalarField>& v0 = std::nullopt);

/// Largest admissible step for the RA scheme on this grid.
double cfl_bound(const DynamicsSpec& dyn, const Grid& grid, double cfl_factor);

/// One backward step of the discounted reach-avoid variational inequality:
///   W~ = W + dt (H_LF(x, grad W) - gamma W),  W_new = max(c, min(ell, W~)).
/// Throws CflViolation when dt exceeds the CFL bound.
ScalarField hji_step(const ScalarField& w, const ScalarField& ell, const ScalarField& c, const DynamicsSpec& dyn,
                     const SolverConfig& cfg, double dt);

/// Marches backward from the terminal condition until the value stops
/// changing (converged, final_field ~ V_gamma) or max_horizon is reached
/// (final_field = W(x, 0) for T = max_horizon, an under-approximation of the
/// reach-avoid set). Throws NonFiniteValue if a node becomes NaN/Inf.
SolveResult solve(const ScalarField& ell, const ScalarField& c, const DynamicsSpec& dyn, const SolverConfig& cfg,
                  const std::optional<ScalarField>& v0 = std::nullopt, const StepObserver& observer = {});

/// True when the Lipschitz estimate of the dynamics is below the discount
/// rate, the regime in which V_gamma is guaranteed bounded and Lipschitz.
bool lipschitz_condition_holds(const DynamicsSpec& dyn, double gamma);

}  // namespace dreach
