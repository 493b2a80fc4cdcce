#include <cmath>

#include "doctest.h"
#include "dreach/errors.hpp"
#include "dreach/geometry.hpp"
#include "dreach/rclvf.hpp"
#include "support.hpp"

using namespace dreach;
using namespace dreach::testing;

namespace {

SolverConfig godunov_config() {
    SolverConfig cfg;
    cfg.scheme = NumericalHamiltonian::godunov;
    cfg.max_horizon = 100;
    return cfg;
}

// sup over s in [0, |x|/0.8] of e^{gamma s} (|x| - 0.8 s): worst-case push
// away from the origin with net closing speed 0.8, sampled densely.
double integrator_clvf_oracle(double x, double gamma) {
    const double a = std::abs(x);
    const double horizon = a / 0.8;
    double best = a;
    const int n = 20000;
    for (int k = 0; k <= n; ++k) {
        const double s = horizon * k / n;
        best = std::max(best, std::exp(gamma * s) * (a - 0.8 * s));
    }
    return best;
}

StabilizeSpec origin() {
    StabilizeSpec st;
    st.point = {0.0};
    return st;
}

}  // namespace

TEST_CASE("SRCIS of the integrator is the origin") {
    const auto pr = integrator_problem();
    const double dx = pr.grid.axis(0).spacing;
    const auto s = compute_srcis(integrator1d(), origin(), pr.grid, godunov_config());
    CHECK(s.v_min >= 0.0);
    CHECK(s.v_min < dx);
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        const double x = pr.grid.point(i)[0];
        if (std::abs(x) <= 2.0) CHECK(std::abs(s.field[i] - std::abs(x)) <= 2 * dx);
        if (s.mask[i]) CHECK(std::abs(x) <= dx + 1e-12);
    }
}

TEST_CASE("SRCIS of motionless dynamics is the distance") {
    const std::pair<double, double> b[] = {{-1, 1}, {-1, 1}};
    const std::size_t n[] = {11, 11};
    const Grid g = build_grid(b, n, {false, false});
    StabilizeSpec st;
    st.point = {0.0, 0.0};
    const auto s = compute_srcis(zero_dynamics(2), st, g, godunov_config());
    CHECK(s.v_min == 0.0);
    CHECK(s.field == seed_field(st, g));
}

TEST_CASE("R-CLVF of the integrator matches the trajectory oracle") {
    const auto pr = integrator_problem();
    const double dx = pr.grid.axis(0).spacing;
    auto st = origin();
    st.gamma_clvf = 0.5;
    const auto r = compute_rclvf(integrator1d(), st, 0.0, pr.grid, godunov_config());
    CHECK(r.capped == 0);
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        const double x = pr.grid.point(i)[0];
        if (std::abs(x) <= 1.6) CHECK(std::abs(r.field[i] - integrator_clvf_oracle(x, 0.5)) <= 3 * dx);
        if (std::abs(x) <= 1.6 - dx) CHECK(r.field[i] == doctest::Approx(std::abs(x)).epsilon(1e-9));
        if (std::abs(x) >= 2.0) CHECK(r.field[i] > std::abs(x));
    }
    const double p[] = {0.0};
    CHECK(interpolate(r.field, p) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("R-CLVF at the stabilization point equals minus the SRCIS level") {
    const auto pr = integrator_problem(121);
    auto st = origin();
    const auto r = compute_rclvf(integrator1d(), st, 0.3, pr.grid, godunov_config());
    const double p[] = {0.0};
    CHECK(interpolate(r.field, p) == doctest::Approx(-0.3));
}

TEST_CASE("R-CLVF diverges without control authority") {
    const auto pr = integrator_problem(61);
    const auto helpless = linear_affine(1, {0.0}, {0.0}, {0.0}, {{-1.0}, {1.0}}, {1.0}, {{-0.2}, {0.2}});
    auto st = origin();
    auto cfg = godunov_config();
    CHECK_THROWS_AS(compute_rclvf(helpless, st, 0.0, pr.grid, cfg), NoConvergence);
}

TEST_CASE("R-CLVF requires a positive rate") {
    const auto pr = integrator_problem(61);
    auto st = origin();
    st.gamma_clvf = 0.0;
    CHECK_THROWS_AS(compute_rclvf(integrator1d(), st, 0.0, pr.grid, godunov_config()), DomainError);
    st.gamma_clvf = 0.5;
    st.point = {7.0};
    CHECK_THROWS_AS(compute_rclvf(integrator1d(), st, 0.0, pr.grid, godunov_config()), DomainError);
}

TEST_CASE("shift against a unit-ball target") {
    const std::pair<double, double> b[] = {{-2, 2}, {-2, 2}};
    const std::size_t n[] = {41, 41};
    const Grid g = build_grid(b, n, {false, false});
    const double dx = g.axis(0).spacing;
    const auto clvf = sample_to_field(norm_to_point({0, 0}), g);
    const auto ell = sample_to_field(circle({0, 0}, 1.0), g);
    const auto s = shift_rclvf(clvf, ell, dx);
    CHECK(s.big_m == doctest::Approx(1.0 - dx));
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(s.shifted[i] == clvf[i] - s.big_m);
        if (s.shifted[i] < 0) CHECK(ell[i] < 0);
    }
}

TEST_CASE("shift with the whole domain as target") {
    const auto pr = integrator_problem(41);
    const auto clvf = sample_to_field(norm_to_point({0}), pr.grid);
    const ScalarField everywhere(pr.grid, -1.0);
    const auto s = shift_rclvf(clvf, everywhere, 0.1);
    CHECK(s.big_m == doctest::Approx(clvf.max() - 0.1));
}

TEST_CASE("shift fails when no sublevel set fits in the target") {
    const auto pr = integrator_problem(41);
    const auto clvf = sample_to_field(norm_to_point({0}), pr.grid);
    // Target far from the minimum of the R-CLVF.
    const auto ell = sample_to_field(offset(norm_to_point({2.5}), -0.3), pr.grid);
    CHECK_THROWS_AS(shift_rclvf(clvf, ell, 0.1), AssumptionViolated);
}

TEST_CASE("assembled R-CLVF result is consistent") {
    const auto pr = integrator_problem();
    auto st = origin();
    const auto r = build_rclvf(integrator1d(), pr.ell, st, godunov_config());
    CHECK(r.v_min == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.level_tol == doctest::Approx(pr.grid.axis(0).spacing));
    CHECK(r.big_m == doctest::Approx(0.5 - r.level_tol));
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        CHECK(r.shifted_field[i] == r.field[i] - r.big_m);
        if (r.shifted_field[i] < 0) CHECK(pr.ell[i] < 0);
    }
    const double x[] = {-1.25};
    CHECK(distance_to_srcis(r, x) == doctest::Approx(1.25));
}
