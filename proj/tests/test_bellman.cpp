#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dreach/bellman.hpp"
#include "dreach/hji_solver.hpp"
#include "support.hpp"

using namespace dreach;
using namespace dreach::testing;

namespace {

Grid square_grid(std::size_t n) {
    const std::pair<double, double> b[] = {{-2, 2}, {-2, 2}};
    const std::size_t c[] = {n, n};
    return build_grid(b, c, {false, false});
}

}  // namespace

TEST_CASE("backup of constant data") {
    const auto pr = integrator_problem(41);
    const ScalarField m1(pr.grid, -1.0);
    BackupConfig cfg;
    cfg.gamma = 0.1;
    cfg.dt = 0.1;
    for (const auto& dyn : {integrator1d(), zero_dynamics(1)}) {
        const auto out = bellman_backup(m1, m1, m1, dyn, cfg);
        for (double v : out.values()) CHECK(v == -1.0);
    }
}

TEST_CASE("constraint dominates the backup") {
    const auto pr = integrator_problem(41);
    const ScalarField two(pr.grid, 2.0);
    std::mt19937_64 rng(1);
    const auto v = random_lipschitz_field(pr.grid, rng);
    const auto out = bellman_backup(v, pr.ell, two, integrator1d(), BackupConfig{});
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (pr.ell[i] <= 2.0) CHECK(out[i] == 2.0);
    }
}

TEST_CASE("backup is deterministic") {
    const auto pr = integrator_problem(41);
    std::mt19937_64 rng(2);
    const auto v = random_lipschitz_field(pr.grid, rng);
    const auto copy = v;
    CHECK(bellman_backup(v, pr.ell, pr.c, integrator1d(), {}) ==
          bellman_backup(copy, pr.ell, pr.c, integrator1d(), {}));
}

TEST_CASE("backup validates its configuration") {
    const auto pr = integrator_problem(41);
    BackupConfig cfg;
    cfg.control_samples = 1;
    CHECK_THROWS_AS(bellman_backup(pr.ell, pr.ell, pr.c, integrator1d(), cfg), DomainError);
    cfg = {};
    cfg.dt = 0.0;
    CHECK_THROWS_AS(bellman_backup(pr.ell, pr.ell, pr.c, integrator1d(), cfg), DomainError);
    const auto other = integrator_problem(43);
    CHECK_THROWS_AS(bellman_backup(pr.ell, other.ell, pr.c, integrator1d(), {}), GridMismatch);
}

TEST_CASE("contraction on random field pairs") {
    std::mt19937_64 rng(3);
    const auto pr = integrator_problem(41);
    const Grid g2 = square_grid(21);
    std::mt19937_64 rng2(4);
    const auto ell2 = random_lipschitz_field(g2, rng2), c2 = random_lipschitz_field(g2, rng2);
    for (double gamma : {0.1, 0.5}) {
        for (double dt : {0.05, 0.2}) {
            const BackupConfig cfg{dt, gamma, 3, 3};
            const BellmanOperator op1(integrator1d(), pr.grid, cfg);
            const BellmanOperator op2(double_integrator2d(), g2, cfg);
            for (int k = 0; k < 20; ++k) {
                const auto a = random_lipschitz_field(pr.grid, rng), b = random_lipschitz_field(pr.grid, rng);
                const auto r1 = contraction_check(op1, a, b, pr.ell, pr.c);
                CHECK(r1.lhs <= r1.rhs + 1e-12);
                const auto a2 = random_lipschitz_field(g2, rng), b2 = random_lipschitz_field(g2, rng);
                const auto r2 = contraction_check(op2, a2, b2, ell2, c2);
                CHECK(r2.lhs <= r2.rhs + 1e-12);
            }
        }
    }
}

TEST_CASE("contraction examples") {
    const auto pr = integrator_problem(41);
    std::mt19937_64 rng(5);
    const auto v = random_lipschitz_field(pr.grid, rng);
    const BackupConfig cfg{0.2, 0.5, 3, 3};
    const auto same = contraction_check(v, v, pr.ell, pr.c, integrator1d(), cfg);
    CHECK(same.lhs == 0.0);
    CHECK(same.rhs == 0.0);
    ScalarField shifted = v;
    for (auto& x : shifted.values()) x += 0.7;
    const auto r = contraction_check(v, shifted, pr.ell, pr.c, integrator1d(), cfg);
    CHECK(r.lhs <= std::exp(-0.1) * 0.7 + 1e-12);
    CHECK(r.rhs == doctest::Approx(std::exp(-0.1) * 0.7));
}

TEST_CASE("backup is monotone") {
    const auto pr = integrator_problem(41);
    std::mt19937_64 rng(6);
    const BellmanOperator op(integrator1d(), pr.grid, BackupConfig{});
    for (int k = 0; k < 20; ++k) {
        const auto a = random_lipschitz_field(pr.grid, rng);
        ScalarField b = a;
        const auto bump = random_lipschitz_field(pr.grid, rng);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += std::abs(bump[i]);
        const auto ba = op.apply(a, pr.ell, pr.c), bb = op.apply(b, pr.ell, pr.c);
        for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i] <= bb[i]);
    }
}

TEST_CASE("value iteration converges Q-linearly") {
    const auto pr = integrator_problem();
    const BackupConfig cfg{0.05, 0.1, 3, 3};
    const auto r = value_iteration(terminal_condition(pr.ell, pr.c), pr.ell, pr.c, integrator1d(), cfg, 1e-6, 100000);
    CHECK(r.converged);
    const double bound = std::exp(-cfg.gamma * cfg.dt) + 0.05;
    for (std::size_t k = 5; k < r.deltas.size(); ++k) {
        if (r.deltas[k - 1] > 0) CHECK(r.deltas[k] / r.deltas[k - 1] <= bound);
    }
    CHECK(integrator_misclassified(pr, r.field) == 0);

    // Restarting from the fixed point stops after one iteration.
    const auto again = value_iteration(r.field, pr.ell, pr.c, integrator1d(), cfg, 1e-5, 10);
    CHECK(again.deltas.size() == 1);
    CHECK(again.deltas[0] < 1e-5);
}

TEST_CASE("value iteration limit is independent of the start") {
    const auto pr = integrator_problem();
    const BackupConfig cfg{0.05, 0.1, 3, 3};
    const double tol = 1e-6;
    const auto a = value_iteration(terminal_condition(pr.ell, pr.c), pr.ell, pr.c, integrator1d(), cfg, tol, 100000);
    const auto b = value_iteration(ScalarField(pr.grid, 5.0), pr.ell, pr.c, integrator1d(), cfg, tol, 100000);
    // Stopping at delta < tol leaves the iterate within tol / (1 - e^{-gamma dt}) of the limit.
    const double slack = 2 * tol / (1 - std::exp(-cfg.gamma * cfg.dt));
    CHECK(sup_distance(a.field, b.field) <= slack);
}

TEST_CASE("semi-Lagrangian and level-set solutions agree") {
    const auto pr = integrator_problem();
    const BackupConfig bcfg{0.05, 0.1, 3, 3};
    const auto sl = value_iteration(terminal_condition(pr.ell, pr.c), pr.ell, pr.c, integrator1d(), bcfg, 1e-6, 100000);
    SolverConfig scfg;
    scfg.max_horizon = 200;
    const auto pde = solve(pr.ell, pr.c, integrator1d(), scfg);
    // Regression constant fitted once on this problem (observed 0.31).
    const double dx = pr.grid.axis(0).spacing;
    CHECK(sup_distance(sl.field, pde.final_field) <= 0.5 * (dx + bcfg.dt));
    std::size_t disagree = 0;
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        const double x = pr.grid.point(i)[0];
        if (std::abs(x - 1.0) <= dx + 1e-12 || 3.0 - std::abs(x) <= dx + 1e-12) continue;
        if ((sl.field[i] < 0) != (pde.final_field[i] < 0)) ++disagree;
    }
    CHECK(disagree == 0);
}

TEST_CASE("value iteration reports non-convergence with the partial result") {
    const auto pr = integrator_problem(41);
    try {
        value_iteration(ScalarField(pr.grid, 5.0), pr.ell, pr.c, integrator1d(), BackupConfig{}, 1e-9, 3);
        FAIL("expected NoConvergence");
    } catch (const ValueIterationNoConvergence& e) {
        CHECK(e.partial().deltas.size() == 3);
        CHECK_FALSE(e.partial().converged);
        CHECK(e.partial().field.size() == pr.grid.size());
    }
    CHECK_THROWS_AS(value_iteration(pr.ell, pr.ell, pr.c, integrator1d(), BackupConfig{}, 0.0, 3), DomainError);
}

TEST_CASE("delta history csv") {
    std::ostringstream out;
    write_delta_csv(out, {1.0, 0.5, 0.25});
    CHECK(out.str() == "1,1,\n2,0.5,0.5\n3,0.25,0.5\n");
}
