#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "dreach/dynamics.hpp"
#include "dreach/errors.hpp"
#include "dreach/grid.hpp"

namespace dreach {

struct BackupConfig {
    double dt = 0.1;
    double gamma = 0.1;
    std::size_t control_samples = 3;      // per channel, endpoints included
    std::size_t disturbance_samples = 3;  // per channel, endpoints included
};

void validate(const BackupConfig& cfg);

/// Semi-Lagrangian one-step backup. At every node x,
///   max_d min_u min{ max(ell, c), max(e^{-gamma dt} V(flow(x, u, d, dt)), c) }
/// with sampled inputs held constant over the step. Flow endpoints and their
/// interpolation stencils are computed once at construction.
class BellmanOperator {
public:
    BellmanOperator(const DynamicsSpec& dyn, const Grid& grid, const BackupConfig& cfg);

    ScalarField apply(const ScalarField& v, const ScalarField& ell, const ScalarField& c) const;

    const Grid& grid() const { return grid_; }
    const BackupConfig& config() const { return cfg_; }
    /// True if any flow endpoint left a non-periodic boundary and was clamped.
    bool any_clamped() const { return any_clamped_; }

private:
    Grid grid_;
    BackupConfig cfg_;
    std::size_t n_u_ = 0, n_d_ = 0;
    // CSR layout over (node, d sample, u sample).
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> nodes_;
    std::vector<double> weights_;
    bool any_clamped_ = false;
};

ScalarField bellman_backup(const ScalarField& v, const ScalarField& ell, const ScalarField& c,
                           const DynamicsSpec& dyn, const BackupConfig& cfg);

struct ValueIterationResult {
    ScalarField field;
    std::vector<double> deltas;  // ||V^{k+1} - V^k||_inf per iteration
    bool converged = false;
};

/// Thrown when max_iters is reached; carries the last iterate.
class ValueIterationNoConvergence : public NoConvergence {
public:
    explicit ValueIterationNoConvergence(ValueIterationResult partial);
    const ValueIterationResult& partial() const noexcept { return partial_; }

private:
    ValueIterationResult partial_;
};

/// V^{k+1} = B[V^k] until the sup-norm change drops below tol.
ValueIterationResult value_iteration(const ScalarField& v0, const ScalarField& ell, const ScalarField& c,
                                     const DynamicsSpec& dyn, const BackupConfig& cfg, double tol,
                                     std::size_t max_iters);

struct ContractionCheck {
    double lhs = 0.0;  // ||B[V1] - B[V2]||_inf
    double rhs = 0.0;  // e^{-gamma dt} ||V1 - V2||_inf
};

ContractionCheck contraction_check(const ScalarField& v1, const ScalarField& v2, const ScalarField& ell,
                                   const ScalarField& c, const DynamicsSpec& dyn, const BackupConfig& cfg);
ContractionCheck contraction_check(const BellmanOperator& op, const ScalarField& v1, const ScalarField& v2,
                                   const ScalarField& ell, const ScalarField& c);

/// Lines "iteration,delta,ratio"; ratio is empty on the first line.
void write_delta_csv(std::ostream& out, const std::vector<double>& deltas);

}  // namespace dreach
