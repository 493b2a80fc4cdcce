#pragma once

#include <cmath>
#include <random>

#include "dreach/grid.hpp"

namespace dreach::testing {

// 1D integrator benchmark: target |x| <= 0.5, obstacle [1, 2], domain [-3, 3].
struct IntegratorProblem {
    Grid grid;
    ScalarField ell, c;
};

inline IntegratorProblem integrator_problem(std::size_t nodes = 241) {
    const std::pair<double, double> b[] = {{-3, 3}};
    const std::size_t n[] = {nodes};
    Grid g = build_grid(b, n, {false});
    ScalarField ell(g), c(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.point(i)[0];
        ell[i] = std::abs(x) - 0.5;
        c[i] = 0.5 - std::abs(x - 1.5);
    }
    return {g, ell, c};
}

// Number of nodes whose sign disagrees with the analytic set {x < 1}, ignoring
// nodes within one cell of x = 1 or of the domain edge.
inline std::size_t integrator_misclassified(const IntegratorProblem& pr, const ScalarField& v) {
    const double dx = pr.grid.axis(0).spacing;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < pr.grid.size(); ++i) {
        const double x = pr.grid.point(i)[0];
        if (std::abs(x - 1.0) <= dx + 1e-12 || 3.0 - std::abs(x) <= dx + 1e-12) continue;
        if ((v[i] < 0) != (x < 1.0)) ++bad;
    }
    return bad;
}

// Random field with slopes bounded by `slope`: a sum of random plane waves.
inline ScalarField random_lipschitz_field(const Grid& g, std::mt19937_64& rng, double slope = 2.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t waves = 4;
    std::vector<std::vector<double>> k(waves, std::vector<double>(g.dims()));
    std::vector<double> amp(waves), phase(waves);
    for (std::size_t w = 0; w < waves; ++w) {
        for (auto& kv : k[w]) kv = 3.0 * u(rng);
        amp[w] = u(rng);
        phase[w] = 3.0 * u(rng);
    }
    const double offset = u(rng);
    ScalarField f(g);
    std::vector<double> x(g.dims());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.point(i, x);
        double v = offset;
        for (std::size_t w = 0; w < waves; ++w) {
            double arg = phase[w];
            for (std::size_t d = 0; d < g.dims(); ++d) arg += k[w][d] * x[d];
            v += amp[w] * std::sin(arg);
        }
        f[i] = v;
    }
    // Rescale so the largest wave-number sum keeps the slope bounded.
    double bound = 0.0;
    for (std::size_t w = 0; w < waves; ++w) {
        double kn = 0.0;
        for (double kv : k[w]) kn += std::abs(kv);
        bound += std::abs(amp[w]) * kn;
    }
    if (bound > slope) {
        for (auto& v : f.values()) v *= slope / bound;
    }
    return f;
}

}  // namespace dreach::testing
