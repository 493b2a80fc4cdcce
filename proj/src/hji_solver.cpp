#include "dreach/hji_solver.hpp"

#include <algorithm>
#include <cmath>

#include "dreach/errors.hpp"

namespace dreach {

void validate(const SolverConfig& cfg) {
    if (!(cfg.gamma >= 0.0)) throw DomainError("solver.gamma must be nonnegative");
    if (!(cfg.cfl_factor > 0.0 && cfg.cfl_factor <= 1.0)) throw DomainError("solver.cfl_factor must lie in (0, 1]");
    if (!(cfg.convergence_tol > 0.0)) throw DomainError("solver.convergence_tol must be positive");
    if (!(cfg.max_horizon > 0.0)) throw DomainError("solver.max_horizon must be positive");
    if (!(cfg.snapshot_interval > 0.0)) throw DomainError("solver.snapshot_interval must be positive");
    if (cfg.convergence_window == 0) throw DomainError("solver.convergence_window must be positive");
}

ScalarField terminal_condition(const ScalarField& ell, const ScalarField& c, const std::optional<ScalarField>& v0) {
    require_same_grid(ell, c, "terminal_condition");
    if (v0) require_same_grid(ell, *v0, "terminal_condition");
    ScalarField w(ell.grid());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::max(ell[i], c[i]);
        if (v0) w[i] = std::max(w[i], (*v0)[i]);
    }
    return w;
}

double cfl_bound(const DynamicsSpec& dyn, const Grid& grid, double cfl_factor) {
    return LevelSetStepper(dyn, grid, DerivativeOrder::first, 0.0).cfl_bound(cfl_factor);
}

namespace {

StepClamp reach_avoid_clamp(const ScalarField& ell, const ScalarField& c) {
    return [&ell, &c](std::span<double> next, std::span<const double>) {
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::max(c[i], std::min(ell[i], next[i]));
    };
}

}  // namespace

ScalarField hji_step(const ScalarField& w, const ScalarField& ell, const ScalarField& c, const DynamicsSpec& dyn,
                     const SolverConfig& cfg, double dt) {
    validate(cfg);
    require_same_grid(w, ell, "hji_step");
    require_same_grid(w, c, "hji_step");
    LevelSetStepper stepper(dyn, w.grid(), cfg.derivative_order, -cfg.gamma, cfg.scheme);
    const double bound = stepper.cfl_bound(cfg.cfl_factor);
    if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) throw CflViolation(dt, bound);
    ScalarField out(w.grid());
    stepper.advance(w, dt, out);
    reach_avoid_clamp(ell, c)(out.values(), w.values());
    return out;
}

SolveResult solve(const ScalarField& ell, const ScalarField& c, const DynamicsSpec& dyn, const SolverConfig& cfg,
                  const std::optional<ScalarField>& v0, const StepObserver& observer) {
    validate(cfg);
    require_same_grid(ell, c, "solve");
    LevelSetStepper stepper(dyn, ell.grid(), cfg.derivative_order, -cfg.gamma, cfg.scheme);

    MarchSettings s;
    // The discount term joins the CFL rate so forward Euler stays monotone.
    const double rate = cfg.cfl_factor / stepper.cfl_bound(cfg.cfl_factor) + cfg.gamma;
    s.dt = rate > 0.0 ? cfg.cfl_factor / rate : cfg.snapshot_interval;
    s.dt = std::min(s.dt, cfg.snapshot_interval);
    s.max_horizon = cfg.max_horizon;
    s.snapshot_interval = cfg.snapshot_interval;
    s.convergence_tol = cfg.convergence_tol;
    s.convergence_window = cfg.convergence_window;
    s.keep_snapshots = cfg.keep_snapshots;

    return march(stepper, terminal_condition(ell, c, v0), reach_avoid_clamp(ell, c), s, observer);
}

bool lipschitz_condition_holds(const DynamicsSpec& dyn, double gamma) { return dyn.lipschitz_estimate < gamma; }

}  // namespace dreach
