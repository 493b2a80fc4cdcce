#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dreach/dynamics.hpp"
#include "dreach/grid.hpp"

namespace dreach {

/// Numerical Hamiltonians.
///   lax_friedrichs: H(x, (L+R)/2) + sum_i alpha_i(x) (R_i - L_i) / 2
///   godunov: exact extremum over the gradient box; separable dynamics only,
///            much less diffusive at kinks.
enum class NumericalHamiltonian { lax_friedrichs, godunov };

/// Explicit time marching of  dW/dtau = H^(x, L, R) + linear_coef * W with
/// H = max_d min_u p . f. The RA solver uses linear_coef = -gamma, the
/// R-CLVF solver +gamma. Variational-inequality clamps are left to callers.
class LevelSetStepper {
public:
    LevelSetStepper(const DynamicsSpec& dyn, const Grid& grid, DerivativeOrder order, double linear_coef,
                    NumericalHamiltonian scheme = NumericalHamiltonian::lax_friedrichs);

    /// cfl_factor / sum_i (max alpha_i / dx_i); +inf for motionless dynamics.
    double cfl_bound(double cfl_factor) const;

    /// Right-hand side at every node.
    void rhs(const ScalarField& w, std::vector<double>& out);

    /// One unclamped step: forward Euler for first-order derivatives, TVD-RK3
    /// (Shu-Osher) for WENO5.
    void advance(const ScalarField& w, double dt, ScalarField& out);

    const NodeDynamics& node_dynamics() const { return node_dyn_; }
    DerivativeOrder order() const { return order_; }
    double linear_coef() const { return linear_coef_; }

private:
    NodeDynamics node_dyn_;
    Grid grid_;
    DerivativeOrder order_;
    double linear_coef_;
    NumericalHamiltonian scheme_;
    GradientPair grads_;
    std::vector<double> k_;
    ScalarField stage_;
};

struct Snapshot {
    double time_to_go = 0.0;
    ScalarField field;
};

struct SolveResult {
    ScalarField final_field;
    std::vector<Snapshot> snapshots;  // increasing time-to-go; first is the terminal condition
    bool converged = false;
    std::vector<double> residual_history;  // sup-norm change per unit time, one per step
    std::size_t iterations = 0;
    double horizon = 0.0;  // time-to-go reached
};

/// Called after every step with (time_to_go, field).
using StepObserver = std::function<void(double, const ScalarField&)>;

/// Applied after each full step: (next, previous) -> next, in place.
using StepClamp = std::function<void(std::span<double>, std::span<const double>)>;

struct MarchSettings {
    double dt = 0.0;  // nominal step; steps are shortened to land on snapshot times
    double max_horizon = 0.0;
    double snapshot_interval = 0.0;
    double convergence_tol = 0.0;
    std::size_t convergence_window = 10;
    bool keep_snapshots = true;
};

/// Time-marches `initial` with the stepper, clamping after each step, until
/// `convergence_window` consecutive steps change the field by less than
/// convergence_tol per unit time, or max_horizon is reached.
SolveResult march(LevelSetStepper& stepper, ScalarField initial, const StepClamp& clamp,
                  const MarchSettings& settings, const StepObserver& observer = {});

}  // namespace dreach
