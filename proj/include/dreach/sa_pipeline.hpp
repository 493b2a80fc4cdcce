#pragma once

#include <vector>

#include "dreach/dynamics.hpp"
#include "dreach/geometry.hpp"
#include "dreach/hji_solver.hpp"
#include "dreach/rclvf.hpp"

namespace dreach {

struct SaResult {
    ScalarField sa_field;     // V^SA
    RclvfResult rclvf;
    SolveResult ra;           // inner reach-avoid solve; its snapshots drive pi_RA
    std::vector<char> sa_mask;  // sa_field < 0
};

/// Two-step stabilize-avoid construction: R-CLVF (SRCIS, R-CLVF, shift) and
/// then the discounted reach-avoid solve with the shifted R-CLVF, clipped at
/// the divergence cap, in place of ell. Errors are rethrown with the failing
/// stage named in the message.
SaResult solve_sa(const DynamicsSpec& dyn, const ScalarField& ell, const ScalarField& c, const StabilizeSpec& stab,
                  const SolverConfig& cfg);

SaResult solve_sa(const DynamicsSpec& dyn, const ImplicitSurface& ell, const ImplicitSurface& c,
                  const StabilizeSpec& stab, const Grid& grid, const SolverConfig& cfg);

/// Target function used by the reach-avoid stage: min(shifted R-CLVF, cap).
ScalarField sa_target(const RclvfResult& rclvf);

/// Nodes with value < 0.
std::vector<char> negative_mask(const ScalarField& field);

}  // namespace dreach
