#include "dreach/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dreach/errors.hpp"

namespace dreach {

double InputBox::magnitude(std::size_t i) const { return std::max(std::abs(lower[i]), std::abs(upper[i])); }

void DynamicsSpec::evaluate(std::span<const double> x, std::span<const double> u, std::span<const double> d,
                            std::span<double> out) const {
    if (general_field) {
        general_field(x, u, d, out);
        return;
    }
    const std::size_t mu = n_controls();
    const std::size_t md = n_disturbances();
    std::vector<double> b(n_dims * mu), e(n_dims * md);
    drift(x, out);
    if (mu) control_jacobian(x, b);
    if (md) disturbance_jacobian(x, e);
    for (std::size_t i = 0; i < n_dims; ++i) {
        for (std::size_t j = 0; j < mu; ++j) out[i] += b[i * mu + j] * u[j];
        for (std::size_t k = 0; k < md; ++k) out[i] += e[i * md + k] * d[k];
    }
}

std::vector<double> DynamicsSpec::evaluate(std::span<const double> x, std::span<const double> u,
                                           std::span<const double> d) const {
    std::vector<double> out(n_dims);
    evaluate(x, u, d, out);
    return out;
}

void validate(const DynamicsSpec& dyn) {
    if (dyn.n_dims == 0) throw DomainError("dynamics '" + dyn.name + "' has no state dimensions");
    for (const InputBox* box : {&dyn.control_bounds, &dyn.disturbance_bounds}) {
        if (box->lower.size() != box->upper.size()) throw DomainError("input box bounds differ in length");
        for (std::size_t i = 0; i < box->size(); ++i) {
            if (!(box->lower[i] <= box->upper[i])) throw DomainError("input box is empty (min > max)");
        }
    }
    if (!dyn.general_field && (!dyn.drift || (dyn.n_controls() && !dyn.control_jacobian) ||
                               (dyn.n_disturbances() && !dyn.disturbance_jacobian))) {
        throw DomainError("dynamics '" + dyn.name + "' is missing an affine component");
    }
    for (std::size_t a : dyn.angle_dims) {
        if (a >= dyn.n_dims) throw DomainError("angle dimension out of range");
    }
}

// ---------------------------------------------------------------------------
// Built-in systems

DynamicsSpec dubins3d(double speed, double turn_rate, double disturbance) {
    DynamicsSpec dyn;
    dyn.name = "dubins3d";
    dyn.n_dims = 3;
    dyn.drift = [speed](std::span<const double> x, std::span<double> out) {
        out[0] = speed * std::cos(x[2]);
        out[1] = speed * std::sin(x[2]);
        out[2] = 0.0;
    };
    dyn.control_jacobian = [](std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = 1.0;
    };
    dyn.disturbance_jacobian = [](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        out[0] = 1.0;  // (0,0)
        out[3] = 1.0;  // (1,1)
    };
    dyn.control_bounds = {{-turn_rate}, {turn_rate}};
    dyn.disturbance_bounds = {{-disturbance, -disturbance}, {disturbance, disturbance}};
    dyn.lipschitz_estimate = speed;
    dyn.angle_dims = {2};
    return dyn;
}

DynamicsSpec integrator1d(double control, double disturbance) {
    return linear_affine(1, {0.0}, {0.0}, {1.0}, {{-control}, {control}}, {1.0},
                         {{-disturbance}, {disturbance}});
}

DynamicsSpec double_integrator2d(double control, double disturbance) {
    DynamicsSpec dyn = linear_affine(2, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {{-control}, {control}},
                                     {0.0, 1.0}, {{-disturbance}, {disturbance}});
    dyn.name = "double_integrator2d";
    return dyn;
}

DynamicsSpec zero_dynamics(std::size_t n_dims, std::size_t n_controls, std::size_t n_disturbances) {
    DynamicsSpec dyn;
    dyn.name = "zero";
    dyn.n_dims = n_dims;
    dyn.drift = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
    dyn.control_jacobian = dyn.drift;
    dyn.disturbance_jacobian = dyn.drift;
    dyn.control_bounds = {std::vector<double>(n_controls, -1.0), std::vector<double>(n_controls, 1.0)};
    dyn.disturbance_bounds = {std::vector<double>(n_disturbances, -1.0), std::vector<double>(n_disturbances, 1.0)};
    return dyn;
}

DynamicsSpec linear_affine(std::size_t n_dims, std::vector<double> a, std::vector<double> b,
                           std::vector<double> control_matrix, InputBox control_bounds,
                           std::vector<double> disturbance_matrix, InputBox disturbance_bounds) {
    if (a.size() != n_dims * n_dims || b.size() != n_dims ||
        control_matrix.size() != n_dims * control_bounds.size() ||
        disturbance_matrix.size() != n_dims * disturbance_bounds.size()) {
        throw DomainError("linear system coefficient tables have inconsistent sizes");
    }
    DynamicsSpec dyn;
    dyn.name = n_dims == 1 ? "integrator1d" : "linear";
    dyn.n_dims = n_dims;
    double lip = 0.0;  // max absolute row sum of A
    for (std::size_t i = 0; i < n_dims; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_dims; ++j) row += std::abs(a[i * n_dims + j]);
        lip = std::max(lip, row);
    }
    dyn.lipschitz_estimate = lip;
    dyn.drift = [n_dims, a = std::move(a), b = std::move(b)](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < n_dims; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < n_dims; ++j) s += a[i * n_dims + j] * x[j];
            out[i] = s;
        }
    };
    dyn.control_jacobian = [m = std::move(control_matrix)](std::span<const double>, std::span<double> out) {
        std::copy(m.begin(), m.end(), out.begin());
    };
    dyn.disturbance_jacobian = [m = std::move(disturbance_matrix)](std::span<const double>, std::span<double> out) {
        std::copy(m.begin(), m.end(), out.begin());
    };
    dyn.control_bounds = std::move(control_bounds);
    dyn.disturbance_bounds = std::move(disturbance_bounds);
    validate(dyn);
    return dyn;
}

// ---------------------------------------------------------------------------
// Hamiltonian and friends

namespace {

// Switching coefficients (p^T B)_j and (p^T E)_k.
void switching(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> p,
               std::vector<double>& drift, std::vector<double>& cu, std::vector<double>& cd) {
    const std::size_t n = dyn.n_dims, mu = dyn.n_controls(), md = dyn.n_disturbances();
    drift.assign(n, 0.0);
    dyn.drift(x, drift);
    std::vector<double> b(n * mu), e(n * md);
    if (mu) dyn.control_jacobian(x, b);
    if (md) dyn.disturbance_jacobian(x, e);
    cu.assign(mu, 0.0);
    cd.assign(md, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < mu; ++j) cu[j] += p[i] * b[i * mu + j];
        for (std::size_t k = 0; k < md; ++k) cd[k] += p[i] * e[i * md + k];
    }
}

double pick_min(double coef, double lo, double hi) {
    if (coef > 0.0) return lo;
    if (coef < 0.0) return hi;
    return 0.5 * (lo + hi);
}

double pick_max(double coef, double lo, double hi) {
    if (coef > 0.0) return hi;
    if (coef < 0.0) return lo;
    return 0.5 * (lo + hi);
}

// All points of the per-channel sample lattice, flattened.
std::vector<std::vector<double>> lattice(const InputBox& box, std::size_t samples) {
    std::vector<std::vector<double>> pts{{}};
    for (std::size_t c = 0; c < box.size(); ++c) {
        std::vector<std::vector<double>> next;
        for (const auto& partial : pts) {
            for (std::size_t s = 0; s < samples; ++s) {
                const double t = samples == 1 ? 0.5 : static_cast<double>(s) / static_cast<double>(samples - 1);
                auto q = partial;
                q.push_back(box.lower[c] + t * (box.upper[c] - box.lower[c]));
                next.push_back(std::move(q));
            }
        }
        pts = std::move(next);
    }
    return pts;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Sampled max_d min_u for general dynamics; returns the saddle inputs too.
double sampled_game(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> p,
                    OptimalInputs* best) {
    const auto us = lattice(dyn.control_bounds, std::max<std::size_t>(2, dyn.input_samples));
    const auto ds = lattice(dyn.disturbance_bounds, std::max<std::size_t>(2, dyn.input_samples));
    std::vector<double> f(dyn.n_dims);
    double outer = -std::numeric_limits<double>::infinity();
    for (const auto& d : ds) {
        double inner = std::numeric_limits<double>::infinity();
        const std::vector<double>* arg_u = &us.front();
        for (const auto& u : us) {
            dyn.evaluate(x, u, d, f);
            const double v = dot(p, f);
            if (v < inner) {
                inner = v;
                arg_u = &u;
            }
        }
        if (inner > outer) {
            outer = inner;
            if (best) *best = {*arg_u, d};
        }
    }
    return outer;
}

}  // namespace

OptimalInputs optimal_inputs(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> p) {
    OptimalInputs out;
    if (!dyn.is_affine()) {
        sampled_game(dyn, x, p, &out);
        return out;
    }
    std::vector<double> drift, cu, cd;
    switching(dyn, x, p, drift, cu, cd);
    out.u.resize(cu.size());
    out.d.resize(cd.size());
    for (std::size_t j = 0; j < cu.size(); ++j) {
        out.u[j] = pick_min(cu[j], dyn.control_bounds.lower[j], dyn.control_bounds.upper[j]);
    }
    for (std::size_t k = 0; k < cd.size(); ++k) {
        out.d[k] = pick_max(cd[k], dyn.disturbance_bounds.lower[k], dyn.disturbance_bounds.upper[k]);
    }
    return out;
}

double hamiltonian(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> p) {
    if (!dyn.is_affine()) return sampled_game(dyn, x, p, nullptr);
    std::vector<double> drift, cu, cd;
    switching(dyn, x, p, drift, cu, cd);
    double h = dot(p, drift);
    for (std::size_t j = 0; j < cu.size(); ++j) {
        h += cu[j] * pick_min(cu[j], dyn.control_bounds.lower[j], dyn.control_bounds.upper[j]);
    }
    for (std::size_t k = 0; k < cd.size(); ++k) {
        h += cd[k] * pick_max(cd[k], dyn.disturbance_bounds.lower[k], dyn.disturbance_bounds.upper[k]);
    }
    return h;
}

std::vector<double> dissipation_bounds(const DynamicsSpec& dyn, std::span<const double> x) {
    const std::size_t n = dyn.n_dims, mu = dyn.n_controls(), md = dyn.n_disturbances();
    std::vector<double> alpha(n, 0.0);
    if (!dyn.is_affine()) {
        const auto us = lattice(dyn.control_bounds, std::max<std::size_t>(2, dyn.input_samples));
        const auto ds = lattice(dyn.disturbance_bounds, std::max<std::size_t>(2, dyn.input_samples));
        std::vector<double> f(n);
        for (const auto& u : us) {
            for (const auto& d : ds) {
                dyn.evaluate(x, u, d, f);
                for (std::size_t i = 0; i < n; ++i) alpha[i] = std::max(alpha[i], std::abs(f[i]));
            }
        }
        return alpha;
    }
    std::vector<double> drift(n), b(n * mu), e(n * md);
    dyn.drift(x, drift);
    if (mu) dyn.control_jacobian(x, b);
    if (md) dyn.disturbance_jacobian(x, e);
    for (std::size_t i = 0; i < n; ++i) {
        double a = std::abs(drift[i]);
        for (std::size_t j = 0; j < mu; ++j) a += std::abs(b[i * mu + j]) * dyn.control_bounds.magnitude(j);
        for (std::size_t k = 0; k < md; ++k) a += std::abs(e[i * md + k]) * dyn.disturbance_bounds.magnitude(k);
        alpha[i] = a;
    }
    return alpha;
}

std::vector<double> flow(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> u,
                         std::span<const double> d, double dt) {
    if (!(dt > 0.0)) throw DomainError("flow step must be positive");
    const std::size_t n = dyn.n_dims;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), out(x.begin(), x.end());
    dyn.evaluate(x, u, d, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    dyn.evaluate(tmp, u, d, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    dyn.evaluate(tmp, u, d, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    dyn.evaluate(tmp, u, d, k4);
    for (std::size_t i = 0; i < n; ++i) out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    constexpr double pi = std::numbers::pi;
    for (std::size_t a : dyn.angle_dims) {
        double t = out[a] + pi;
        t -= 2.0 * pi * std::floor(t / (2.0 * pi));
        out[a] = t - pi;
        if (out[a] >= pi) out[a] = -pi;
    }
    return out;
}

// ---------------------------------------------------------------------------

NodeDynamics::NodeDynamics(const DynamicsSpec& dyn, const Grid& grid)
    : dyn_(dyn), grid_(grid), n_(dyn.n_dims), mu_(dyn.n_controls()), md_(dyn.n_disturbances()),
      affine_(dyn.is_affine()) {
    validate(dyn_);
    if (grid.dims() != n_) throw GridMismatch("dynamics dimension does not match grid dimension");
    const std::size_t nodes = grid.size();
    alpha_.resize(nodes * n_);
    max_alpha_.assign(n_, 0.0);
    if (affine_) {
        drift_.resize(nodes * n_);
        b_.resize(nodes * n_ * mu_);
        e_.resize(nodes * n_ * md_);
    }
    std::vector<double> x(n_);
    for (std::size_t node = 0; node < nodes; ++node) {
        grid.point(node, x);
        const auto a = dissipation_bounds(dyn_, x);
        for (std::size_t i = 0; i < n_; ++i) {
            alpha_[node * n_ + i] = a[i];
            max_alpha_[i] = std::max(max_alpha_[i], a[i]);
        }
        if (affine_) {
            dyn_.drift(x, std::span<double>(drift_.data() + node * n_, n_));
            if (mu_) dyn_.control_jacobian(x, std::span<double>(b_.data() + node * n_ * mu_, n_ * mu_));
            if (md_) dyn_.disturbance_jacobian(x, std::span<double>(e_.data() + node * n_ * md_, n_ * md_));
        }
    }
    u_lo_ = dyn_.control_bounds.lower;
    u_hi_ = dyn_.control_bounds.upper;
    d_lo_ = dyn_.disturbance_bounds.lower;
    d_hi_ = dyn_.disturbance_bounds.upper;
    if (affine_) build_separable_slopes();
}

void NodeDynamics::build_separable_slopes() {
    const std::size_t nodes = grid_.size();
    // A channel is separable when one state row carries all its coefficients.
    std::vector<std::ptrdiff_t> u_row(mu_, -1), d_row(md_, -1);
    const auto claim = [](std::ptrdiff_t& row, std::size_t i) {
        if (row < 0) row = static_cast<std::ptrdiff_t>(i);
        return row == static_cast<std::ptrdiff_t>(i);
    };
    for (std::size_t node = 0; node < nodes; ++node) {
        const double* b = b_.data() + node * n_ * mu_;
        const double* e = e_.data() + node * n_ * md_;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < mu_; ++j) {
                if (b[i * mu_ + j] != 0.0 && !claim(u_row[j], i)) return;
            }
            for (std::size_t k = 0; k < md_; ++k) {
                if (e[i * md_ + k] != 0.0 && !claim(d_row[k], i)) return;
            }
        }
    }
    slope_pos_.resize(nodes * n_);
    slope_neg_.resize(nodes * n_);
    for (std::size_t node = 0; node < nodes; ++node) {
        const double* b = b_.data() + node * n_ * mu_;
        const double* e = e_.data() + node * n_ * md_;
        for (std::size_t i = 0; i < n_; ++i) {
            double pos = drift_[node * n_ + i], neg = pos;
            for (std::size_t j = 0; j < mu_; ++j) {
                const double c = b[i * mu_ + j];
                pos += std::min(c * u_lo_[j], c * u_hi_[j]);
                neg += std::max(c * u_lo_[j], c * u_hi_[j]);
            }
            for (std::size_t k = 0; k < md_; ++k) {
                const double c = e[i * md_ + k];
                pos += std::max(c * d_lo_[k], c * d_hi_[k]);
                neg += std::min(c * d_lo_[k], c * d_hi_[k]);
            }
            slope_pos_[node * n_ + i] = pos;
            slope_neg_[node * n_ + i] = neg;
        }
    }
    separable_ = true;
}

double NodeDynamics::godunov_hamiltonian(std::size_t node, std::span<const double> left,
                                         std::span<const double> right) const {
    if (!separable_) throw DomainError("Godunov Hamiltonian requires separable affine dynamics");
    const double* sp = slope_pos_.data() + node * n_;
    const double* sn = slope_neg_.data() + node * n_;
    double h = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const auto hi = [&](double p) { return p * (p > 0.0 ? sp[i] : sn[i]); };
        const double l = left[i], r = right[i];
        const double lo = std::min(l, r), up = std::max(l, r);
        double v;
        if (l <= r) {
            v = std::max(hi(lo), hi(up));
            if (lo < 0.0 && up > 0.0) v = std::max(v, 0.0);
        } else {
            v = std::min(hi(lo), hi(up));
            if (lo < 0.0 && up > 0.0) v = std::min(v, 0.0);
        }
        h += v;
    }
    return h;
}

double NodeDynamics::hamiltonian(std::size_t node, std::span<const double> p) const {
    if (!affine_) {
        std::vector<double> x(n_);
        grid_.point(node, x);
        return dreach::hamiltonian(dyn_, x, p);
    }
    const double* drift = drift_.data() + node * n_;
    const double* b = b_.data() + node * n_ * mu_;
    const double* e = e_.data() + node * n_ * md_;
    double h = 0.0;
    for (std::size_t i = 0; i < n_; ++i) h += p[i] * drift[i];
    for (std::size_t j = 0; j < mu_; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < n_; ++i) c += p[i] * b[i * mu_ + j];
        h += c * pick_min(c, u_lo_[j], u_hi_[j]);
    }
    for (std::size_t k = 0; k < md_; ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < n_; ++i) c += p[i] * e[i * md_ + k];
        h += c * pick_max(c, d_lo_[k], d_hi_[k]);
    }
    return h;
}

}  // namespace dreach
