#include "dreach/rclvf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dreach/errors.hpp"
#include "dreach/level_set.hpp"

namespace dreach {

namespace {

constexpr double kCapFactor = 1e3;
constexpr double kMaxAmplification = 0.1;  // gamma_clvf * dt

double norm_to(std::span<const double> x, const std::vector<double>& p, const std::vector<std::size_t>& dims) {
    double s = 0.0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const double d = x[dims[k]] - p[k];
        s += d * d;
    }
    return std::sqrt(s);
}

MarchSettings march_settings(const LevelSetStepper& stepper, const SolverConfig& cfg, double gamma) {
    MarchSettings s;
    const double rate = cfg.cfl_factor / stepper.cfl_bound(cfg.cfl_factor) + gamma;
    s.dt = rate > 0.0 ? cfg.cfl_factor / rate : cfg.snapshot_interval;
    if (gamma > 0.0) s.dt = std::min(s.dt, kMaxAmplification / gamma);
    s.dt = std::min(s.dt, cfg.snapshot_interval);
    s.max_horizon = cfg.max_horizon;
    s.snapshot_interval = cfg.snapshot_interval;
    s.convergence_tol = cfg.convergence_tol;
    s.convergence_window = cfg.convergence_window;
    s.keep_snapshots = false;
    return s;
}

}  // namespace

std::vector<std::size_t> stabilized_dims(const StabilizeSpec& stab) {
    if (!stab.dims.empty()) return stab.dims;
    std::vector<std::size_t> d(stab.point.size());
    std::iota(d.begin(), d.end(), std::size_t{0});
    return d;
}

void validate(const StabilizeSpec& stab, const Grid& grid) {
    const auto dims = stabilized_dims(stab);
    if (stab.point.empty() || dims.size() != stab.point.size()) {
        throw DomainError("stabilize.point and stabilize.dims must have the same nonzero length");
    }
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (dims[k] >= grid.dims()) throw DomainError("stabilize.dims refers to a missing dimension");
        const auto& ax = grid.axis(dims[k]);
        if (!ax.periodic && (stab.point[k] < ax.lower || stab.point[k] > ax.upper)) {
            throw DomainError("stabilize.point lies outside the grid");
        }
    }
    if (!(stab.gamma_clvf >= 0.0)) throw DomainError("gamma_clvf must be nonnegative");
    if (!(stab.level_tol >= 0.0)) throw DomainError("stabilize.level_tol must be nonnegative");
    if (!(stab.srcis_tol >= 0.0)) throw DomainError("stabilize.srcis_tol must be nonnegative");
}

double effective_level_tol(const StabilizeSpec& stab, const Grid& grid) {
    if (stab.level_tol > 0.0) return stab.level_tol;
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t d : stabilized_dims(stab)) h = std::min(h, grid.axis(d).spacing);
    return h;
}

ScalarField seed_field(const StabilizeSpec& stab, const Grid& grid, double shift) {
    const auto dims = stabilized_dims(stab);
    ScalarField r(grid);
    std::vector<double> x(grid.dims());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.point(i, x);
        r[i] = norm_to(x, stab.point, dims) - shift;
    }
    return r;
}

SrcisResult compute_srcis(const DynamicsSpec& dyn, const StabilizeSpec& stab, const Grid& grid,
                          const SolverConfig& cfg) {
    validate(cfg);
    validate(stab, grid);
    const ScalarField r = seed_field(stab, grid);
    LevelSetStepper stepper(dyn, grid, cfg.derivative_order, 0.0, cfg.scheme);
    const auto clamp = [&r](std::span<double> next, std::span<const double>) {
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::max(r[i], next[i]);
    };
    auto settings = march_settings(stepper, cfg, 0.0);
    if (stab.srcis_tol > 0.0) settings.convergence_tol = stab.srcis_tol;
    auto res = march(stepper, r, clamp, settings);
    if (!res.converged) {
        throw NoConvergence("SRCIS solve did not converge within horizon " + std::to_string(cfg.max_horizon));
    }
    SrcisResult out{std::move(res.final_field), 0.0, {}, res.iterations};
    out.v_min = out.field.min();
    const double tol = effective_level_tol(stab, grid);
    out.mask.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out.mask[i] = out.field[i] <= out.v_min + tol * (1 + 1e-9);
    return out;
}

RclvfField compute_rclvf(const DynamicsSpec& dyn, const StabilizeSpec& stab, double v_min, const Grid& grid,
                         const SolverConfig& cfg) {
    validate(cfg);
    validate(stab, grid);
    if (!(stab.gamma_clvf > 0.0)) throw DomainError("gamma_clvf must be positive for the R-CLVF solve");
    const ScalarField r = seed_field(stab, grid, v_min);
    const double cap = kCapFactor * r.sup_norm();
    LevelSetStepper stepper(dyn, grid, cfg.derivative_order, stab.gamma_clvf, cfg.scheme);
    const auto clamp = [&r, cap](std::span<double> next, std::span<const double> prev) {
        for (std::size_t i = 0; i < next.size(); ++i) {
            next[i] = prev[i] >= cap ? cap : std::min(cap, std::max(r[i], next[i]));
        }
    };
    auto res = march(stepper, r, clamp, march_settings(stepper, cfg, stab.gamma_clvf));
    RclvfField out{std::move(res.final_field), cap, 0, res.iterations, res.horizon};
    for (double v : out.field.values()) out.capped += v >= cap;
    if (out.capped == grid.size()) throw NoConvergence("R-CLVF diverged at every node (no stabilizable set)");
    if (!res.converged) {
        throw NoConvergence("R-CLVF solve did not converge within horizon " + std::to_string(cfg.max_horizon) +
                            " (" + std::to_string(out.capped) + " nodes capped)");
    }
    return out;
}

ShiftResult shift_rclvf(const ScalarField& clvf, const ScalarField& ell, double level_tol) {
    require_same_grid(clvf, ell, "shift_rclvf");
    if (!(level_tol > 0.0)) throw DomainError("level_tol must be positive");
    std::vector<std::size_t> order(clvf.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return clvf[a] < clvf[b]; });
    double level = clvf[order.back()];
    for (std::size_t i : order) {
        if (ell[i] >= 0.0) {
            level = clvf[i];
            break;
        }
    }
    const double big_m = level - level_tol;
    if (big_m < clvf[order.front()]) {
        throw AssumptionViolated("no R-CLVF sublevel set lies inside the target (first exit at level " +
                                 std::to_string(level) + ")");
    }
    ScalarField shifted(clvf.grid());
    for (std::size_t i = 0; i < clvf.size(); ++i) shifted[i] = clvf[i] - big_m;
    return {std::move(shifted), big_m};
}

RclvfResult assemble_rclvf(const StabilizeSpec& stab, const SrcisResult& srcis, RclvfField clvf, ShiftResult shift,
                          double level_tol) {
    RclvfResult out;
    out.field = std::move(clvf.field);
    out.gamma_clvf = stab.gamma_clvf;
    out.p = stab.point;
    out.dims = stabilized_dims(stab);
    out.v_min = srcis.v_min;
    out.srcis_mask = srcis.mask;
    out.shifted_field = std::move(shift.shifted);
    out.big_m = shift.big_m;
    out.cap = clvf.cap;
    out.capped = clvf.capped;
    out.level_tol = level_tol;
    return out;
}

RclvfResult build_rclvf(const DynamicsSpec& dyn, const ScalarField& ell, const StabilizeSpec& stab,
                        const SolverConfig& cfg) {
    const Grid& grid = ell.grid();
    const auto srcis = compute_srcis(dyn, stab, grid, cfg);
    auto clvf = compute_rclvf(dyn, stab, srcis.v_min, grid, cfg);
    const double tol = effective_level_tol(stab, grid);
    auto shift = shift_rclvf(clvf.field, ell, tol);
    return assemble_rclvf(stab, srcis, std::move(clvf), std::move(shift), tol);
}

double distance_to_srcis(const RclvfResult& r, std::span<const double> x) {
    return std::max(0.0, norm_to(x, r.p, r.dims) - r.v_min);
}

}  // namespace dreach
