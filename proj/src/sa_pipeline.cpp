#include "dreach/sa_pipeline.hpp"

#include <algorithm>
#include <string>

#include "dreach/errors.hpp"

namespace dreach {

namespace {

template <typename F>
auto run_stage(const char* stage, F&& body) {
    try {
        return body();
    } catch (const AssumptionViolated& e) {
        throw AssumptionViolated(std::string(stage) + ": " + e.what());
    } catch (const NoConvergence& e) {
        throw NoConvergence(std::string(stage) + ": " + e.what());
    } catch (const NonFiniteValue& e) {
        throw NonFiniteValue(std::string(stage) + ": " + e.what());
    }
}

}  // namespace

ScalarField sa_target(const RclvfResult& rclvf) {
    ScalarField out = rclvf.shifted_field;
    for (auto& v : out.values()) v = std::min(v, rclvf.cap);
    return out;
}

std::vector<char> negative_mask(const ScalarField& field) {
    std::vector<char> mask(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) mask[i] = field[i] < 0.0;
    return mask;
}

SaResult solve_sa(const DynamicsSpec& dyn, const ScalarField& ell, const ScalarField& c, const StabilizeSpec& stab,
                  const SolverConfig& cfg) {
    require_same_grid(ell, c, "solve_sa");
    validate(cfg);
    const Grid& grid = ell.grid();
    const auto srcis = run_stage("srcis", [&] { return compute_srcis(dyn, stab, grid, cfg); });
    auto clvf = run_stage("rclvf", [&] { return compute_rclvf(dyn, stab, srcis.v_min, grid, cfg); });
    const double tol = effective_level_tol(stab, grid);
    auto shift = run_stage("shift", [&] { return shift_rclvf(clvf.field, ell, tol); });

    SaResult out;
    out.rclvf = assemble_rclvf(stab, srcis, std::move(clvf), std::move(shift), tol);
    const ScalarField target = sa_target(out.rclvf);
    out.ra = run_stage("reach-avoid", [&] { return solve(target, c, dyn, cfg); });
    out.sa_field = out.ra.final_field;
    out.sa_mask = negative_mask(out.sa_field);
    return out;
}

SaResult solve_sa(const DynamicsSpec& dyn, const ImplicitSurface& ell, const ImplicitSurface& c,
                  const StabilizeSpec& stab, const Grid& grid, const SolverConfig& cfg) {
    return solve_sa(dyn, sample_to_field(ell, grid), sample_to_field(c, grid), stab, cfg);
}

}  // namespace dreach
