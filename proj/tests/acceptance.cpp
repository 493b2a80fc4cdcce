// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dreach/bellman.hpp"
#include "dreach/control_synthesis.hpp"
#include "dreach/dynamics.hpp"
#include "dreach/geometry.hpp"
#include "dreach/hji_solver.hpp"
#include "dreach/rclvf.hpp"
#include "dreach/sa_pipeline.hpp"
#include "support.hpp"

using namespace dreach;
using namespace dreach::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(const std::string& what) { details.push_back("     " + what); }
};

std::string fmt(const char* f, double a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

int failures = 0;

void run(int id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, title, secs);
    for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failures += !out.pass;
}

// Nodes (away from x = 1 and the domain edge) classified differently from
// the analytic reach-avoid set {x < 1}.
std::size_t misclassified(const IntegratorProblem& pr, const ScalarField& v) { return integrator_misclassified(pr, v); }

SolverConfig lf_config(double gamma) {
    SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.max_horizon = 400;
    return cfg;
}

SolverConfig godunov_config(double max_horizon) {
    SolverConfig cfg;
    cfg.scheme = NumericalHamiltonian::godunov;
    cfg.max_horizon = max_horizon;
    return cfg;
}

// ---------------------------------------------------------------------------

Outcome contraction() {
    Outcome out;
    std::mt19937_64 rng(2024);
    const std::pair<double, double> b1[] = {{-3, 3}};
    const std::size_t n1[] = {41};
    const std::pair<double, double> b2[] = {{-2, 2}, {-2, 2}};
    const std::size_t n2[] = {21, 21};
    struct Case {
        const char* name;
        Grid grid;
        DynamicsSpec dyn;
    };
    const Case cases[] = {{"1D integrator, 41 nodes", build_grid(b1, n1, {false}), integrator1d()},
                          {"2D double integrator, 21x21", build_grid(b2, n2, {false, false}), double_integrator2d()}};
    std::size_t pairs = 0;
    for (const auto& cs : cases) {
        for (double gamma : {0.1, 0.5}) {
            for (double dt : {0.05, 0.2}) {
                const BellmanOperator op(cs.dyn, cs.grid, BackupConfig{dt, gamma, 3, 3});
                const auto ell = random_lipschitz_field(cs.grid, rng);
                const auto c = random_lipschitz_field(cs.grid, rng);
                double worst = -INFINITY, min_ratio_gap = INFINITY;
                for (int k = 0; k < 50; ++k) {
                    const auto v1 = random_lipschitz_field(cs.grid, rng, 4.0);
                    const auto v2 = random_lipschitz_field(cs.grid, rng, 4.0);
                    const auto r = contraction_check(op, v1, v2, ell, c);
                    worst = std::max(worst, r.lhs - r.rhs);
                    if (r.rhs > 0) min_ratio_gap = std::min(min_ratio_gap, 1 - r.lhs / r.rhs);
                    ++pairs;
                }
                out.check(worst <= 1e-12, std::string(cs.name) + fmt(", gamma %.2f", gamma) +
                                              fmt(", dt %.2f: max(lhs - rhs) = %.3g", dt, worst));
            }
        }
    }
    out.note("pairs checked: " + std::to_string(pairs));
    return out;
}

Outcome q_linear() {
    Outcome out;
    const auto pr = integrator_problem();
    const BackupConfig cfg{0.05, 0.1, 3, 3};
    const auto r = value_iteration(terminal_condition(pr.ell, pr.c), pr.ell, pr.c, integrator1d(), cfg, 1e-6, 100000);
    const double bound = std::exp(-cfg.gamma * cfg.dt) + 0.05;
    double worst = 0.0;
    for (std::size_t k = 5; k < r.deltas.size(); ++k) {
        if (r.deltas[k - 1] > 0) worst = std::max(worst, r.deltas[k] / r.deltas[k - 1]);
    }
    out.check(r.converged, "value iteration converged after " + std::to_string(r.deltas.size()) + " iterations");
    out.check(worst <= bound, fmt("largest ratio for k >= 5: %.6f, bound %.6f", worst, bound));
    return out;
}

Outcome init_independence() {
    Outcome out;
    const auto pr = integrator_problem();
    const auto cfg = lf_config(0.1);
    const auto a = solve(pr.ell, pr.c, integrator1d(), cfg);
    const auto b = solve(pr.ell, pr.c, integrator1d(), cfg, ScalarField(pr.grid, 5.0));
    out.check(a.converged && b.converged, fmt("both solves converged (horizons %.1f and %.1f)", a.horizon, b.horizon));
    const double d = sup_distance(a.final_field, b.final_field);
    out.check(d <= 10 * cfg.convergence_tol, fmt("sup distance %.3g, limit %.3g", d, 10 * cfg.convergence_tol));
    return out;
}

Outcome exact_recovery() {
    Outcome out;
    const auto pr = integrator_problem(241);
    const auto pde = solve(pr.ell, pr.c, integrator1d(), lf_config(0.1));
    out.check(pde.converged, fmt("level-set solve converged at time-to-go %.1f", pde.horizon));
    out.check(misclassified(pr, pde.final_field) == 0,
              "level-set nodes misclassified: " + std::to_string(misclassified(pr, pde.final_field)));
    const auto sl = value_iteration(terminal_condition(pr.ell, pr.c), pr.ell, pr.c, integrator1d(),
                                    BackupConfig{0.05, 0.1, 3, 3}, 1e-6, 100000);
    out.check(misclassified(pr, sl.field) == 0,
              "semi-Lagrangian nodes misclassified: " + std::to_string(misclassified(pr, sl.field)));
    out.note(fmt("sup distance between the two solutions: %.4f", sup_distance(sl.field, pde.final_field)));
    return out;
}

Outcome gamma_invariance() {
    Outcome out;
    const auto pr = integrator_problem(241);
    const auto lo = solve(pr.ell, pr.c, integrator1d(), lf_config(0.05));
    const auto hi = solve(pr.ell, pr.c, integrator1d(), lf_config(0.2));
    out.check(lo.converged && hi.converged, fmt("both converged (horizons %.1f and %.1f)", lo.horizon, hi.horizon));
    const double dx = pr.grid.axis(0).spacing;
    std::size_t differ = 0;
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        const double x = pr.grid.point(i)[0];
        if (std::abs(x - 1.0) <= dx + 1e-12 || 3.0 - std::abs(x) <= dx + 1e-12) continue;
        differ += (lo.final_field[i] < 0) != (hi.final_field[i] < 0);
    }
    out.check(differ == 0, "nodes classified differently: " + std::to_string(differ));
    out.check(misclassified(pr, lo.final_field) == 0 && misclassified(pr, hi.final_field) == 0,
              "both match the analytic set");
    return out;
}

// Brute force over bang-bang controls: u = s on [0, tau) then u = -sign(x),
// against the disturbance pushing away from the origin; the value of each
// control is sup_t e^{gamma t} |x(t)| on a dense time grid.
double clvf_brute_force(double x0, double gamma) {
    const double h = 1e-3, t_end = 8.0;
    double best = INFINITY;
    for (double s : {-1.0, 1.0}) {
        for (int m = 0; m <= 60; ++m) {
            const double tau = 0.05 * m;
            double x = x0, worst = std::abs(x0);
            for (int k = 1; k * h <= t_end; ++k) {
                const double t = (k - 1) * h;
                const double u = t < tau ? s : (x > 0 ? -1.0 : (x < 0 ? 1.0 : 0.0));
                const double d = x > 0 ? 0.2 : (x < 0 ? -0.2 : 0.0);
                const double next = x + h * (u + d);
                // The feedback phase stops at the origin instead of chattering.
                x = (t >= tau && next * x < 0) ? 0.0 : next;
                worst = std::max(worst, std::exp(gamma * k * h) * std::abs(x));
                if (worst >= best) break;
            }
            best = std::min(best, worst);
        }
    }
    return best;
}

Outcome rclvf_oracle() {
    Outcome out;
    const auto pr = integrator_problem(241);
    const double dx = pr.grid.axis(0).spacing;
    StabilizeSpec st;
    st.point = {0.0};
    st.gamma_clvf = 0.5;
    const auto cfg = godunov_config(100);
    const auto srcis = compute_srcis(integrator1d(), st, pr.grid, cfg);
    out.check(srcis.v_min < dx, fmt("v_min = %.3g < dx = %.3g", srcis.v_min, dx));
    double err0 = 0.0;
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        const double x = pr.grid.point(i)[0];
        if (std::abs(x) <= 2.0) err0 = std::max(err0, std::abs(srcis.field[i] - std::abs(x)));
    }
    out.check(err0 <= 2 * dx, fmt("undiscounted field vs |x| on |x| <= 2: %.3g (limit %.3g)", err0, 2 * dx));

    const auto r = compute_rclvf(integrator1d(), st, srcis.v_min, pr.grid, cfg);
    double err = 0.0;
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        const double x = pr.grid.point(i)[0];
        if (std::abs(x) <= 1.6) err = std::max(err, std::abs(r.field[i] - clvf_brute_force(x, 0.5)));
    }
    out.check(err <= 3 * dx, fmt("gamma 0.5 field vs brute force on |x| <= 1.6: %.3g (limit %.3g)", err, 3 * dx));
    return out;
}

Outcome exponential_stabilization() {
    Outcome out;
    const auto pr = integrator_problem(241);
    StabilizeSpec st;
    st.point = {0.0};
    st.gamma_clvf = 0.5;
    const auto r = build_rclvf(integrator1d(), pr.ell, st, godunov_config(100));
    const auto dyn = integrator1d();
    const double dt = 0.01;
    double worst = 0.0;
    for (double x0 : {0.5, -0.5, 0.75, -0.75, 1.0, -1.0, 1.25, -1.25, 1.5, -1.5}) {
        std::vector<double> x{x0};
        const double d0 = distance_to_srcis(r, x);
        // k fitted at t = 0, where e^0 dist(x0) = k dist(x0).
        const double k = 1.0;
        double ratio = 0.0;
        for (int step = 0; step * dt <= 5.0 + 1e-12; ++step) {
            const double t = step * dt;
            ratio = std::max(ratio, std::exp(st.gamma_clvf * t) * distance_to_srcis(r, x) / (k * d0));
            const auto dec = controller_h(x, r, dyn);
            x = flow(dyn, x, dec.u, dec.d, dt);
        }
        worst = std::max(worst, ratio);
        out.check(ratio <= 1.2, fmt("x0 = %+.2f: max e^{gt} dist / (k dist0) = %.4f", x0, ratio));
    }
    out.note(fmt("v_min = %.3g, worst ratio %.4f", r.v_min, worst));
    return out;
}

// ---------------------------------------------------------------------------

struct DubinsRun {
    Grid grid;
    DynamicsSpec dyn = dubins3d();
    ImplicitSurface ell, c;
    ScalarField ell_field, c_field;
    SaResult sa;
    SolveResult ra;
    double sa_seconds = 0.0, ra_seconds = 0.0;
};

const DubinsRun& dubins() {
    static const DubinsRun run = [] {
        DubinsRun d;
        const double pi = std::numbers::pi;
        const std::pair<double, double> b[] = {{-5, 5}, {-5, 5}, {-pi, pi}};
        const std::size_t n[] = {61, 61, 40};
        d.grid = build_grid(b, n, {false, false, true});
        d.ell = circle({3.5, 3.5}, 1.0);
        d.c = set_intersection(set_intersection(complement(circle({-2, -2}, 1.0)), complement(circle({3, -3}, 1.0))),
                               box({1.0, 0.5}, {2.0, 1.5}, {0, 1}));
        d.ell_field = sample_to_field(d.ell, d.grid);
        d.c_field = sample_to_field(d.c, d.grid);
        StabilizeSpec st;
        st.point = {3.5, 3.5};
        st.dims = {0, 1};
        st.gamma_clvf = 0.5;
        st.srcis_tol = 0.01;
        const auto cfg = godunov_config(50);
        auto t0 = std::chrono::steady_clock::now();
        d.sa = solve_sa(d.dyn, d.ell_field, d.c_field, st, cfg);
        d.sa_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        t0 = std::chrono::steady_clock::now();
        d.ra = solve(d.ell_field, d.c_field, d.dyn, cfg);
        d.ra_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return d;
    }();
    return run;
}

double distance_to_p(const std::vector<double>& x) { return std::hypot(x[0] - 3.5, x[1] - 3.5); }

Outcome dubins_reproduction() {
    Outcome out;
    const auto& d = dubins();
    out.note(fmt("stabilize-avoid solve %.1f s, reach-avoid solve %.1f s", d.sa_seconds, d.ra_seconds));
    out.note(fmt("v_min %.3f, M %.3f", d.sa.rclvf.v_min, d.sa.rclvf.big_m));

    // (a)
    std::size_t sa_nodes = 0, in_obstacle = 0;
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        sa_nodes += d.sa.sa_mask[i] != 0;
        in_obstacle += d.sa.sa_mask[i] && d.c_field[i] > 0;
    }
    out.check(d.sa.ra.converged, fmt("stabilize-avoid solve converged at time-to-go %.1f", d.sa.ra.horizon));
    out.check(in_obstacle == 0, std::to_string(sa_nodes) + " nodes in sa_mask, " + std::to_string(in_obstacle) +
                                    " of them inside an obstacle");

    // (b)
    RolloutSpec spec;
    spec.mode = RolloutMode::sa;
    spec.dt = 0.05;
    spec.t_end = 30.0;
    const std::vector<double> x0{-4.0, 4.0, 0.0};
    const auto tr = rollout(x0, spec, d.sa.ra.snapshots, &d.sa.rclvf, d.dyn);
    double max_c = -INFINITY;
    std::size_t switch_at = tr.states.size();
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
        max_c = std::max(max_c, d.c(tr.states[k]));
        if (switch_at == tr.states.size() && tr.modes[k] == Phase::stabilize_phase) switch_at = k;
    }
    out.check(max_c < 0, fmt("sa rollout max c along the path: %.3f", max_c));
    out.check(switch_at < tr.states.size(),
              switch_at < tr.states.size() ? fmt("entered I_M at t = %.2f", tr.times[switch_at]) : "never entered I_M");
    if (switch_at < tr.states.size()) {
        const double at_switch = distance_to_p(tr.states[switch_at]);
        const double final = distance_to_p(tr.states.back());
        out.check(final < at_switch, fmt("distance to p: %.3f at the switch, %.3f at the end", at_switch, final));
        out.note(fmt("distance to I_m: %.3f at the switch, %.3f at the end",
                     distance_to_srcis(d.sa.rclvf, tr.states[switch_at]), distance_to_srcis(d.sa.rclvf, tr.states.back())));
    }
    out.check(!tr.clamped && !tr.outside_domain, "sa rollout stayed on the grid and inside the R-CLVF domain");

    // (c)
    RolloutSpec ra_spec = spec;
    ra_spec.mode = RolloutMode::ra;
    const auto ra_tr = rollout(x0, ra_spec, d.ra.snapshots, nullptr, d.dyn);
    double min_ell = INFINITY, ra_max_c = -INFINITY;
    for (const auto& s : ra_tr.states) {
        min_ell = std::min(min_ell, d.ell(s));
        ra_max_c = std::max(ra_max_c, d.c(s));
    }
    out.check(min_ell < 0, fmt("ra rollout min l along the path: %.3f", min_ell));
    out.note(fmt("ra rollout max c along the path: %.3f", ra_max_c));

    // Rollout properties over sampled stabilize-avoid states (reported only).
    std::mt19937_64 rng(8);
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        if (d.sa.sa_field[i] < -0.05) inside.push_back(i);
    }
    std::size_t safe = 0, reached = 0, sampled = 0;
    for (int k = 0; k < 20 && !inside.empty(); ++k, ++sampled) {
        const auto node = inside[std::uniform_int_distribution<std::size_t>(0, inside.size() - 1)(rng)];
        const auto s = rollout(d.grid.point(node), spec, d.sa.ra.snapshots, &d.sa.rclvf, d.dyn);
        bool ok = true, hit = false;
        for (std::size_t j = 0; j < s.states.size(); ++j) {
            ok = ok && d.c(s.states[j]) < 0;
            hit = hit || s.modes[j] == Phase::stabilize_phase;
        }
        safe += ok;
        reached += hit;
    }
    out.note(std::to_string(sampled) + " sampled sa_mask states: " + std::to_string(safe) + " safe throughout, " +
             std::to_string(reached) + " reached I_M");
    return out;
}

Outcome sa_subset_ra() {
    Outcome out;
    const auto& d = dubins();
    std::size_t sa_nodes = 0, ra_nodes = 0, outside = 0;
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        const bool in_sa = d.sa.sa_field[i] < 0, in_ra = d.ra.final_field[i] < 0;
        sa_nodes += in_sa;
        ra_nodes += in_ra;
        outside += in_sa && !in_ra;
    }
    out.check(d.ra.converged, fmt("reach-avoid solve converged at time-to-go %.1f", d.ra.horizon));
    out.check(outside == 0, std::to_string(sa_nodes) + " sa nodes, " + std::to_string(ra_nodes) + " ra nodes, " +
                                std::to_string(outside) + " sa nodes outside ra");
    return out;
}

}  // namespace

int main() {
    run(1, "Bellman backup contraction", contraction);
    run(2, "Q-linear value-iteration rate", q_linear);
    run(3, "initialization independence", init_independence);
    run(4, "exact recovery of the reach-avoid set", exact_recovery);
    run(5, "set invariance across discount rates", gamma_invariance);
    run(6, "R-CLVF oracle", rclvf_oracle);
    run(7, "exponential stabilization", exponential_stabilization);
    run(8, "Dubins stabilize-avoid and reach-avoid reproduction", dubins_reproduction);
    run(9, "stabilize-avoid set inside reach-avoid set", sa_subset_ra);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
