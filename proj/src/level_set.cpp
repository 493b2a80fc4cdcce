#include "dreach/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dreach/errors.hpp"
#include "dreach/parallel.hpp"

namespace dreach {

LevelSetStepper::LevelSetStepper(const DynamicsSpec& dyn, const Grid& grid, DerivativeOrder order,
                                 double linear_coef, NumericalHamiltonian scheme)
    : node_dyn_(dyn, grid), grid_(grid), order_(order), linear_coef_(linear_coef), scheme_(scheme), stage_(grid) {
    if (scheme_ == NumericalHamiltonian::godunov && !node_dyn_.separable()) {
        throw DomainError("the Godunov scheme needs dynamics whose inputs each drive one state dimension");
    }
}

double LevelSetStepper::cfl_bound(double cfl_factor) const {
    double rate = 0.0;
    const auto& amax = node_dyn_.max_alpha();
    for (std::size_t d = 0; d < grid_.dims(); ++d) rate += amax[d] / grid_.axis(d).spacing;
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    return cfl_factor / rate;
}

void LevelSetStepper::rhs(const ScalarField& w, std::vector<double>& out) {
    upwind_gradients_into(w, order_, grads_);
    const std::size_t nd = grid_.dims();
    out.resize(grid_.size());
    if (scheme_ == NumericalHamiltonian::godunov) {
        parallel_for(grid_.size(), [&](std::size_t b, std::size_t e) {
            std::vector<double> l(nd), r(nd);
            for (std::size_t node = b; node < e; ++node) {
                for (std::size_t d = 0; d < nd; ++d) {
                    l[d] = grads_.left[d][node];
                    r[d] = grads_.right[d][node];
                }
                out[node] = node_dyn_.godunov_hamiltonian(node, l, r) + linear_coef_ * w[node];
            }
        });
        return;
    }
    parallel_for(grid_.size(), [&](std::size_t b, std::size_t e) {
        std::vector<double> p(nd);
        for (std::size_t node = b; node < e; ++node) {
            const auto alpha = node_dyn_.alpha(node);
            double diss = 0.0;
            for (std::size_t d = 0; d < nd; ++d) {
                const double l = grads_.left[d][node];
                const double r = grads_.right[d][node];
                p[d] = 0.5 * (l + r);
                diss += alpha[d] * 0.5 * (r - l);
            }
            out[node] = node_dyn_.hamiltonian(node, p) + diss + linear_coef_ * w[node];
        }
    });
}

void LevelSetStepper::advance(const ScalarField& w, double dt, ScalarField& out) {
    const std::size_t n = grid_.size();
    if (!(out.grid() == grid_)) out = ScalarField(grid_);
    if (order_ == DerivativeOrder::first) {
        rhs(w, k_);
        for (std::size_t i = 0; i < n; ++i) out[i] = w[i] + dt * k_[i];
        return;
    }
    // Shu-Osher TVD-RK3.
    rhs(w, k_);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = w[i] + dt * k_[i];
    rhs(stage_, k_);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = 0.75 * w[i] + 0.25 * (stage_[i] + dt * k_[i]);
    rhs(stage_, k_);
    for (std::size_t i = 0; i < n; ++i) out[i] = w[i] / 3.0 + 2.0 / 3.0 * (stage_[i] + dt * k_[i]);
}

// ---------------------------------------------------------------------------

SolveResult march(LevelSetStepper& stepper, ScalarField initial, const StepClamp& clamp,
                  const MarchSettings& s, const StepObserver& observer) {
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw DomainError("march needs a finite positive time step");
    SolveResult result;
    ScalarField current = std::move(initial);
    ScalarField next(current.grid());
    if (s.keep_snapshots) result.snapshots.push_back({0.0, current});

    const double interval = s.snapshot_interval > 0.0 ? s.snapshot_interval : s.max_horizon;
    double tau = 0.0;
    std::size_t below = 0;
    std::size_t segment = 0;
    bool done = false;
    while (!done && tau < s.max_horizon) {
        ++segment;
        const double target = std::min(static_cast<double>(segment) * interval, s.max_horizon);
        const double span = target - tau;
        if (span <= 0.0) continue;
        const auto steps = static_cast<std::size_t>(std::ceil(span / s.dt - 1e-9));
        const double dt = span / static_cast<double>(std::max<std::size_t>(steps, 1));
        for (std::size_t k = 0; k < std::max<std::size_t>(steps, 1); ++k) {
            stepper.advance(current, dt, next);
            if (clamp) clamp(next.values(), current.values());
            double delta = 0.0;
            for (std::size_t i = 0; i < next.size(); ++i) {
                const double v = next[i];
                if (!std::isfinite(v)) {
                    throw NonFiniteValue("non-finite value at node " + std::to_string(i) + " after time-to-go " +
                                         std::to_string(tau));
                }
                delta = std::max(delta, std::abs(v - current[i]));
            }
            std::swap(current, next);
            tau = (k + 1 == std::max<std::size_t>(steps, 1)) ? target : tau + dt;
            ++result.iterations;
            const double rate = delta / dt;
            result.residual_history.push_back(rate);
            below = rate < s.convergence_tol ? below + 1 : 0;
            if (observer) observer(tau, current);
            if (below >= s.convergence_window) {
                done = true;
                break;
            }
        }
        if (s.keep_snapshots) result.snapshots.push_back({tau, current});
    }
    result.converged = done;
    result.horizon = tau;
    result.final_field = std::move(current);
    return result;
}

}  // namespace dreach
