#pragma once

#include <cstddef>
#include <vector>

#include "dreach/dynamics.hpp"
#include "dreach/grid.hpp"
#include "dreach/hji_solver.hpp"

namespace dreach {

/// Where and how fast to stabilize. The seed is r(x) = ||x_S - point|| over
/// the selected dims S (all dims when empty).
struct StabilizeSpec {
    std::vector<double> point;
    std::vector<std::size_t> dims;
    double gamma_clvf = 0.5;
    double level_tol = 0.0;  // 0 selects the smallest spacing among the selected dims
    // Convergence tolerance of the gamma = 0 stage; 0 uses the solver's. The
    // undiscounted problem creeps slowly under numerical diffusion on coarse
    // grids, so this is often set looser than the solver tolerance.
    double srcis_tol = 0.0;

    bool operator==(const StabilizeSpec&) const = default;
};

void validate(const StabilizeSpec& stab, const Grid& grid);

/// Selected dims, defaulting to the leading point.size() dims.
std::vector<std::size_t> stabilized_dims(const StabilizeSpec& stab);
double effective_level_tol(const StabilizeSpec& stab, const Grid& grid);

/// ||x_S - p|| - shift at every node.
ScalarField seed_field(const StabilizeSpec& stab, const Grid& grid, double shift = 0.0);

struct SrcisResult {
    ScalarField field;        // V_0 (gamma = 0)
    double v_min = 0.0;       // min over nodes
    std::vector<char> mask;   // field <= v_min + level_tol
    std::size_t iterations = 0;
};

/// Solves the gamma = 0 R-CLVF variational inequality. Throws NoConvergence
/// if the horizon is exhausted first.
SrcisResult compute_srcis(const DynamicsSpec& dyn, const StabilizeSpec& stab, const Grid& grid,
                          const SolverConfig& cfg);

struct RclvfField {
    ScalarField field;
    double cap = 0.0;           // divergence cap; nodes at the cap lie outside the domain
    std::size_t capped = 0;     // number of capped nodes
    std::size_t iterations = 0;
    double horizon = 0.0;
};

/// Solves  dV/dtau = H_LF(x, grad V) + gamma_clvf V,  V <- max(r, V)  with
/// r = ||x_S - p|| - v_min until stationary. Nodes that reach the cap
/// (1e3 * max|r|) are frozen there. Throws NoConvergence when every node is
/// capped or the horizon runs out.
RclvfField compute_rclvf(const DynamicsSpec& dyn, const StabilizeSpec& stab, double v_min, const Grid& grid,
                         const SolverConfig& cfg);

struct ShiftResult {
    ScalarField shifted;  // clvf - big_m
    double big_m = 0.0;
};

/// Largest level M such that every node with clvf <= M has ell < 0, less
/// level_tol. Throws AssumptionViolated if that sublevel set is empty.
ShiftResult shift_rclvf(const ScalarField& clvf, const ScalarField& ell, double level_tol);

struct RclvfResult {
    ScalarField field;          // V^CLVF
    double gamma_clvf = 0.0;
    std::vector<double> p;
    std::vector<std::size_t> dims;
    double v_min = 0.0;
    std::vector<char> srcis_mask;
    ScalarField shifted_field;  // V^CLVF - big_m
    double big_m = 0.0;
    double cap = 0.0;
    std::size_t capped = 0;
    double level_tol = 0.0;
};

RclvfResult assemble_rclvf(const StabilizeSpec& stab, const SrcisResult& srcis, RclvfField clvf, ShiftResult shift,
                          double level_tol);

/// SRCIS, R-CLVF and level shift against ell, in sequence.
RclvfResult build_rclvf(const DynamicsSpec& dyn, const ScalarField& ell, const StabilizeSpec& stab,
                        const SolverConfig& cfg);

/// Distance from a state to the SRCIS ball {||x_S - p|| <= v_min}; zero inside.
double distance_to_srcis(const RclvfResult& r, std::span<const double> x);

}  // namespace dreach
