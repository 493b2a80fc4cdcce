#include "dreach/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dreach/errors.hpp"
#include "dreach/parallel.hpp"

namespace dreach {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    strides_.assign(axes_.size(), 1);
    size_ = 1;
    for (std::size_t d = axes_.size(); d-- > 0;) {
        strides_[d] = size_;
        size_ *= axes_[d].count;
    }
    if (axes_.empty()) size_ = 0;
}

void Grid::unravel(std::size_t node, std::span<std::size_t> idx) const {
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        idx[d] = (node / strides_[d]) % axes_[d].count;
    }
}

std::size_t Grid::ravel(std::span<const std::size_t> idx) const {
    std::size_t node = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) node += idx[d] * strides_[d];
    return node;
}

std::vector<double> Grid::point(std::size_t node) const {
    std::vector<double> x(dims());
    point(node, x);
    return x;
}

void Grid::point(std::size_t node, std::span<double> out) const {
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        out[d] = axes_[d].coordinate((node / strides_[d]) % axes_[d].count);
    }
}

std::vector<double> Grid::spacing() const {
    std::vector<double> h;
    h.reserve(axes_.size());
    for (const auto& a : axes_) h.push_back(a.spacing);
    return h;
}

double Grid::min_spacing() const {
    double h = axes_.empty() ? 0.0 : axes_[0].spacing;
    for (const auto& a : axes_) h = std::min(h, a.spacing);
    return h;
}

void Grid::wrap(std::span<double> x) const {
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const Axis& a = axes_[d];
        if (!a.periodic) continue;
        const double p = a.period();
        double t = x[d] - a.lower;
        t -= p * std::floor(t / p);
        double w = a.lower + t;
        if (w >= a.upper) w = a.lower;
        x[d] = w;
    }
}

bool Grid::contains(std::span<const double> x) const {
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const Axis& a = axes_[d];
        if (a.periodic) continue;
        if (x[d] < a.lower || x[d] > a.upper) return false;
    }
    return true;
}

Grid build_grid(std::span<const std::pair<double, double>> bounds,
                std::span<const std::size_t> counts,
                const std::vector<bool>& periodic) {
    if (bounds.empty()) throw DomainError("grid needs at least one dimension");
    if (counts.size() != bounds.size() || periodic.size() != bounds.size()) {
        throw DomainError("grid bounds, counts and periodic flags differ in length");
    }
    std::vector<Axis> axes;
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        const auto [lo, hi] = bounds[d];
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
            throw DomainError("grid bounds for dimension " + std::to_string(d) +
                              " are not ordered (lower < upper)");
        }
        if (counts[d] < 3) {
            throw DomainError("grid dimension " + std::to_string(d) + " needs at least 3 nodes");
        }
        Axis a;
        a.lower = lo;
        a.upper = hi;
        a.count = counts[d];
        a.periodic = periodic[d];
        a.spacing = (hi - lo) / static_cast<double>(a.periodic ? counts[d] : counts[d] - 1);
        axes.push_back(a);
    }
    return Grid(std::move(axes));
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Grid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw GridMismatch("field has " + std::to_string(values_.size()) + " values but grid has " +
                           std::to_string(grid_.size()) + " nodes");
    }
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (!(a.grid() == b.grid())) throw GridMismatch(std::string(what) + ": fields live on different grids");
}

double sup_distance(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "sup_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Derivatives

namespace {

constexpr std::size_t kGhost = 3;

// HJ-WENO5 combination of five consecutive first differences, ordered so that
// v1 is farthest upwind.
double weno5(double v1, double v2, double v3, double v4, double v5) {
    const double p1 = v1 / 3.0 - 7.0 * v2 / 6.0 + 11.0 * v3 / 6.0;
    const double p2 = -v2 / 6.0 + 5.0 * v3 / 6.0 + v4 / 3.0;
    const double p3 = v3 / 3.0 + 5.0 * v4 / 6.0 - v5 / 6.0;

    const double s1 = 13.0 / 12.0 * (v1 - 2 * v2 + v3) * (v1 - 2 * v2 + v3) +
                      0.25 * (v1 - 4 * v2 + 3 * v3) * (v1 - 4 * v2 + 3 * v3);
    const double s2 = 13.0 / 12.0 * (v2 - 2 * v3 + v4) * (v2 - 2 * v3 + v4) +
                      0.25 * (v2 - v4) * (v2 - v4);
    const double s3 = 13.0 / 12.0 * (v3 - 2 * v4 + v5) * (v3 - 2 * v4 + v5) +
                      0.25 * (3 * v3 - 4 * v4 + v5) * (3 * v3 - 4 * v4 + v5);

    const double scale = std::max({v1 * v1, v2 * v2, v3 * v3, v4 * v4, v5 * v5});
    const double eps = 1e-6 * scale + 1e-99;
    const double a1 = 0.1 / ((s1 + eps) * (s1 + eps));
    const double a2 = 0.6 / ((s2 + eps) * (s2 + eps));
    const double a3 = 0.3 / ((s3 + eps) * (s3 + eps));
    const double sum = a1 + a2 + a3;
    return (a1 * p1 + a2 * p2 + a3 * p3) / sum;
}

// Fills buf[kGhost .. kGhost+n) from the field line and the ghost cells around it.
void gather_line(std::span<const double> v, std::size_t start, std::size_t stride, const Axis& axis,
                 std::vector<double>& buf) {
    const std::size_t n = axis.count;
    buf.resize(n + 2 * kGhost);
    for (std::size_t i = 0; i < n; ++i) buf[kGhost + i] = v[start + i * stride];
    if (axis.periodic) {
        for (std::size_t k = 1; k <= kGhost; ++k) {
            buf[kGhost - k] = buf[kGhost + (n - k % n) % n];
            buf[kGhost + n - 1 + k] = buf[kGhost + (k - 1) % n];
        }
    } else {
        const double lo_slope = buf[kGhost + 1] - buf[kGhost];
        const double hi_slope = buf[kGhost + n - 1] - buf[kGhost + n - 2];
        for (std::size_t k = 1; k <= kGhost; ++k) {
            buf[kGhost - k] = buf[kGhost] - static_cast<double>(k) * lo_slope;
            buf[kGhost + n - 1 + k] = buf[kGhost + n - 1] + static_cast<double>(k) * hi_slope;
        }
    }
}

}  // namespace

void upwind_gradients_into(const ScalarField& field, DerivativeOrder order, GradientPair& out) {
    const Grid& g = field.grid();
    const std::size_t nd = g.dims();
    out.left.resize(nd);
    out.right.resize(nd);
    const auto v = field.values();

    for (std::size_t d = 0; d < nd; ++d) {
        out.left[d].resize(g.size());
        out.right[d].resize(g.size());
        const Axis& axis = g.axis(d);
        const std::size_t n = axis.count;
        const std::size_t stride = g.stride(d);
        const std::size_t block = n * stride;
        const std::size_t lines = g.size() / n;
        const double inv_h = 1.0 / axis.spacing;
        auto& left = out.left[d];
        auto& right = out.right[d];

        parallel_for(lines, [&](std::size_t lb, std::size_t le) {
            std::vector<double> buf;
            std::vector<double> diff;
            for (std::size_t line = lb; line < le; ++line) {
                const std::size_t start = (line / stride) * block + line % stride;
                gather_line(v, start, stride, axis, buf);
                // diff[j] = (buf[j+1] - buf[j]) / h
                diff.resize(buf.size() - 1);
                for (std::size_t j = 0; j + 1 < buf.size(); ++j) diff[j] = (buf[j + 1] - buf[j]) * inv_h;
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t b = kGhost + i;  // buffer index of node i
                    const std::size_t node = start + i * stride;
                    if (order == DerivativeOrder::first) {
                        left[node] = diff[b - 1];
                        right[node] = diff[b];
                    } else {
                        left[node] = weno5(diff[b - 3], diff[b - 2], diff[b - 1], diff[b], diff[b + 1]);
                        right[node] = weno5(diff[b + 2], diff[b + 1], diff[b], diff[b - 1], diff[b - 2]);
                    }
                }
            }
        });
    }
}

GradientPair upwind_gradients(const ScalarField& field, DerivativeOrder order) {
    GradientPair out;
    upwind_gradients_into(field, order, out);
    return out;
}

// ---------------------------------------------------------------------------
// Interpolation

Stencil make_stencil(const Grid& grid, std::span<const double> point) {
    const std::size_t nd = grid.dims();
    Stencil s;
    std::vector<std::size_t> lo(nd), hi(nd);
    std::vector<double> w(nd);
    for (std::size_t d = 0; d < nd; ++d) {
        const Axis& a = grid.axis(d);
        const std::size_t n = a.count;
        double x = point[d];
        if (a.periodic) {
            double t = (x - a.lower) / a.spacing;
            t -= static_cast<double>(n) * std::floor(t / static_cast<double>(n));
            auto i0 = static_cast<std::size_t>(std::floor(t));
            if (i0 >= n) i0 = n - 1;
            w[d] = t - static_cast<double>(i0);
            lo[d] = i0;
            hi[d] = (i0 + 1) % n;
        } else {
            if (x < a.lower) {
                x = a.lower;
                s.clamped = true;
            } else if (x > a.upper) {
                x = a.upper;
                s.clamped = true;
            }
            const double t = (x - a.lower) / a.spacing;
            auto i0 = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
            if (i0 > n - 2) i0 = n - 2;
            w[d] = std::min(1.0, t - static_cast<double>(i0));
            lo[d] = i0;
            hi[d] = i0 + 1;
        }
    }
    const std::size_t corners = std::size_t{1} << nd;
    s.nodes.reserve(corners);
    s.weights.reserve(corners);
    for (std::size_t mask = 0; mask < corners; ++mask) {
        double weight = 1.0;
        std::size_t node = 0;
        for (std::size_t d = 0; d < nd; ++d) {
            const bool upper = (mask >> d) & 1U;
            weight *= upper ? w[d] : 1.0 - w[d];
            node += (upper ? hi[d] : lo[d]) * grid.stride(d);
        }
        if (weight == 0.0) continue;
        s.nodes.push_back(node);
        s.weights.push_back(weight);
    }
    return s;
}

double apply_stencil(const Stencil& stencil, std::span<const double> values) {
    double acc = 0.0;
    for (std::size_t k = 0; k < stencil.nodes.size(); ++k) acc += stencil.weights[k] * values[stencil.nodes[k]];
    return acc;
}

double interpolate(const ScalarField& field, std::span<const double> point, bool& clamped) {
    const Stencil s = make_stencil(field.grid(), point);
    clamped = s.clamped;
    return apply_stencil(s, field.values());
}

double interpolate(const ScalarField& field, std::span<const double> point) {
    bool clamped = false;
    return interpolate(field, point, clamped);
}

void node_gradient(const ScalarField& field, std::size_t node, std::span<double> out) {
    const Grid& g = field.grid();
    for (std::size_t d = 0; d < g.dims(); ++d) {
        const Axis& a = g.axis(d);
        const std::size_t n = a.count;
        const std::size_t stride = g.stride(d);
        const std::size_t i = (node / stride) % n;
        const std::size_t base = node - i * stride;
        if (a.periodic) {
            const double vp = field[base + ((i + 1) % n) * stride];
            const double vm = field[base + ((i + n - 1) % n) * stride];
            out[d] = (vp - vm) / (2.0 * a.spacing);
        } else if (i == 0) {
            out[d] = (field[base + stride] - field[base]) / a.spacing;
        } else if (i == n - 1) {
            out[d] = (field[base + i * stride] - field[base + (i - 1) * stride]) / a.spacing;
        } else {
            out[d] = (field[base + (i + 1) * stride] - field[base + (i - 1) * stride]) / (2.0 * a.spacing);
        }
    }
}

std::vector<double> gradient_at(const ScalarField& field, std::span<const double> point) {
    const std::size_t nd = field.grid().dims();
    const Stencil s = make_stencil(field.grid(), point);
    std::vector<double> grad(nd, 0.0), tmp(nd);
    for (std::size_t k = 0; k < s.nodes.size(); ++k) {
        node_gradient(field, s.nodes[k], tmp);
        for (std::size_t d = 0; d < nd; ++d) grad[d] += s.weights[k] * tmp[d];
    }
    return grad;
}

}  // namespace dreach
