#include "dreach/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "dreach/parallel.hpp"

namespace dreach {

namespace {

std::vector<std::vector<double>> sample_box(const InputBox& box, std::size_t per_channel) {
    std::vector<std::vector<double>> out{{}};
    for (std::size_t j = 0; j < box.size(); ++j) {
        std::vector<std::vector<double>> next;
        next.reserve(out.size() * per_channel);
        for (const auto& prefix : out) {
            for (std::size_t k = 0; k < per_channel; ++k) {
                auto v = prefix;
                const double t = static_cast<double>(k) / static_cast<double>(per_channel - 1);
                v.push_back(k + 1 == per_channel ? box.upper[j] : box.lower[j] + t * (box.upper[j] - box.lower[j]));
                next.push_back(std::move(v));
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace

void validate(const BackupConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw DomainError("backup dt must be positive");
    if (!(cfg.gamma >= 0.0)) throw DomainError("backup gamma must be nonnegative");
    if (cfg.control_samples < 2 || cfg.disturbance_samples < 2) {
        throw DomainError("input sample counts must be at least 2");
    }
}

BellmanOperator::BellmanOperator(const DynamicsSpec& dyn, const Grid& grid, const BackupConfig& cfg)
    : grid_(grid), cfg_(cfg) {
    validate(cfg);
    const auto us = sample_box(dyn.control_bounds, cfg.control_samples);
    const auto ds = sample_box(dyn.disturbance_bounds, cfg.disturbance_samples);
    n_u_ = us.size();
    n_d_ = ds.size();
    const std::size_t per_node = n_u_ * n_d_;
    const std::size_t n = grid.size();

    // Stencils are built per chunk and stitched in order so the layout does
    // not depend on the thread count.
    std::vector<std::vector<Stencil>> stencils(n);
    std::vector<char> clamped(n, 0);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
        std::vector<double> x(grid.dims());
        for (std::size_t node = b; node < e; ++node) {
            grid.point(node, x);
            auto& mine = stencils[node];
            mine.reserve(per_node);
            for (const auto& d : ds) {
                for (const auto& u : us) {
                    const auto end = flow(dyn, x, u, d, cfg.dt);
                    mine.push_back(make_stencil(grid, end));
                    if (mine.back().clamped) clamped[node] = 1;
                }
            }
        }
    });
    offsets_.reserve(n * per_node + 1);
    offsets_.push_back(0);
    for (std::size_t node = 0; node < n; ++node) {
        for (const auto& s : stencils[node]) {
            nodes_.insert(nodes_.end(), s.nodes.begin(), s.nodes.end());
            weights_.insert(weights_.end(), s.weights.begin(), s.weights.end());
            offsets_.push_back(nodes_.size());
        }
        any_clamped_ = any_clamped_ || clamped[node];
    }
}

ScalarField BellmanOperator::apply(const ScalarField& v, const ScalarField& ell, const ScalarField& c) const {
    if (!(v.grid() == grid_)) throw GridMismatch("bellman_backup: value field is on a different grid");
    require_same_grid(v, ell, "bellman_backup");
    require_same_grid(v, c, "bellman_backup");
    const double discount = std::exp(-cfg_.gamma * cfg_.dt);
    const std::size_t per_node = n_u_ * n_d_;
    const auto vals = v.values();
    ScalarField out(grid_);
    parallel_for(grid_.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t node = b; node < e; ++node) {
            const double stop = std::max(ell[node], c[node]);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t id = 0; id < n_d_; ++id) {
                double worst = std::numeric_limits<double>::infinity();
                for (std::size_t iu = 0; iu < n_u_; ++iu) {
                    const std::size_t k = node * per_node + id * n_u_ + iu;
                    double interp = 0.0;
                    for (std::size_t j = offsets_[k]; j < offsets_[k + 1]; ++j) interp += weights_[j] * vals[nodes_[j]];
                    const double cont = std::max(discount * interp, c[node]);
                    worst = std::min(worst, std::min(stop, cont));
                }
                best = std::max(best, worst);
            }
            out[node] = best;
        }
    });
    return out;
}

ScalarField bellman_backup(const ScalarField& v, const ScalarField& ell, const ScalarField& c,
                           const DynamicsSpec& dyn, const BackupConfig& cfg) {
    require_same_grid(v, ell, "bellman_backup");
    require_same_grid(v, c, "bellman_backup");
    return BellmanOperator(dyn, v.grid(), cfg).apply(v, ell, c);
}

ValueIterationNoConvergence::ValueIterationNoConvergence(ValueIterationResult partial)
    : NoConvergence("value iteration did not converge in " + std::to_string(partial.deltas.size()) +
                    " iterations (last delta " +
                    (partial.deltas.empty() ? std::string("n/a") : std::to_string(partial.deltas.back())) + ")"),
      partial_(std::move(partial)) {}

ValueIterationResult value_iteration(const ScalarField& v0, const ScalarField& ell, const ScalarField& c,
                                     const DynamicsSpec& dyn, const BackupConfig& cfg, double tol,
                                     std::size_t max_iters) {
    if (!(tol > 0.0)) throw DomainError("value iteration tolerance must be positive");
    require_same_grid(v0, ell, "value_iteration");
    require_same_grid(v0, c, "value_iteration");
    const BellmanOperator op(dyn, v0.grid(), cfg);
    ValueIterationResult r{v0, {}, false};
    for (std::size_t k = 0; k < max_iters; ++k) {
        ScalarField next = op.apply(r.field, ell, c);
        const double delta = sup_distance(next, r.field);
        r.field = std::move(next);
        r.deltas.push_back(delta);
        if (delta < tol) {
            r.converged = true;
            return r;
        }
    }
    throw ValueIterationNoConvergence(std::move(r));
}

ContractionCheck contraction_check(const BellmanOperator& op, const ScalarField& v1, const ScalarField& v2,
                                   const ScalarField& ell, const ScalarField& c) {
    require_same_grid(v1, v2, "contraction_check");
    const auto& cfg = op.config();
    return {sup_distance(op.apply(v1, ell, c), op.apply(v2, ell, c)),
            std::exp(-cfg.gamma * cfg.dt) * sup_distance(v1, v2)};
}

ContractionCheck contraction_check(const ScalarField& v1, const ScalarField& v2, const ScalarField& ell,
                                   const ScalarField& c, const DynamicsSpec& dyn, const BackupConfig& cfg) {
    require_same_grid(v1, v2, "contraction_check");
    return contraction_check(BellmanOperator(dyn, v1.grid(), cfg), v1, v2, ell, c);
}

void write_delta_csv(std::ostream& out, const std::vector<double>& deltas) {
    out << std::setprecision(17);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        out << k + 1 << ',' << deltas[k] << ',';
        if (k > 0 && deltas[k - 1] > 0.0) out << deltas[k] / deltas[k - 1];
        out << '\n';
    }
}

}  // namespace dreach
