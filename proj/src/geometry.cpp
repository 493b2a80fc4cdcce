#include "dreach/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dreach/errors.hpp"

namespace dreach {

namespace {

std::vector<std::size_t> resolve_dims(std::vector<std::size_t> dims, std::size_t n) {
    if (dims.empty()) {
        dims.resize(n);
        std::iota(dims.begin(), dims.end(), std::size_t{0});
    }
    if (dims.size() != n) throw DomainError("surface dims do not match the number of coordinates");
    return dims;
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
}

}  // namespace

ImplicitSurface circle(std::vector<double> center, double radius, std::vector<std::size_t> dims) {
    if (!(radius > 0.0)) throw DomainError("circle radius must be positive");
    if (center.size() != 2) throw DomainError("circle needs a 2D center");
    dims = resolve_dims(std::move(dims), 2);
    const double r2 = radius * radius;
    std::string desc = "circle" + join(center);
    return {[center, dims, r2](std::span<const double> x) {
                const double a = x[dims[0]] - center[0];
                const double b = x[dims[1]] - center[1];
                return a * a + b * b - r2;
            },
            std::move(desc)};
}

ImplicitSurface box(std::vector<double> center, std::vector<double> half_widths, std::vector<std::size_t> dims) {
    if (center.size() != half_widths.size() || center.empty()) {
        throw DomainError("box center and half widths differ in length");
    }
    for (double h : half_widths) {
        if (!(h > 0.0)) throw DomainError("box half widths must be positive");
    }
    dims = resolve_dims(std::move(dims), center.size());
    std::string desc = "box" + join(center);
    return {[center, half_widths, dims](std::span<const double> x) {
                double m = 0.0;
                for (std::size_t i = 0; i < dims.size(); ++i) {
                    m = std::max(m, std::abs(x[dims[i]] - center[i]) / half_widths[i]);
                }
                return 1.0 - m;
            },
            std::move(desc)};
}

ImplicitSurface sphere(std::vector<double> center, double radius, std::vector<std::size_t> dims) {
    if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
    dims = resolve_dims(std::move(dims), center.size());
    std::string desc = "sphere" + join(center);
    return {[center, radius, dims](std::span<const double> x) {
                double s = 0.0;
                for (std::size_t i = 0; i < dims.size(); ++i) {
                    const double a = x[dims[i]] - center[i];
                    s += a * a;
                }
                return std::sqrt(s) - radius;
            },
            std::move(desc)};
}

ImplicitSurface box_sdf(std::vector<double> center, std::vector<double> half_widths, std::vector<std::size_t> dims) {
    if (center.size() != half_widths.size() || center.empty()) {
        throw DomainError("box center and half widths differ in length");
    }
    for (double h : half_widths) {
        if (!(h > 0.0)) throw DomainError("box half widths must be positive");
    }
    dims = resolve_dims(std::move(dims), center.size());
    std::string desc = "box_sdf" + join(center);
    return {[center, half_widths, dims](std::span<const double> x) {
                double outside = 0.0;
                double inside = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < dims.size(); ++i) {
                    const double q = std::abs(x[dims[i]] - center[i]) - half_widths[i];
                    outside += std::max(q, 0.0) * std::max(q, 0.0);
                    inside = std::max(inside, q);
                }
                return std::sqrt(outside) + std::min(inside, 0.0);
            },
            std::move(desc)};
}

ImplicitSurface halfspace(std::vector<double> normal, double offset_value) {
    const double norm = std::sqrt(std::inner_product(normal.begin(), normal.end(), normal.begin(), 0.0));
    if (!(norm > 0.0)) throw DomainError("halfspace normal must be nonzero");
    for (double& n : normal) n /= norm;
    const double b = offset_value / norm;
    std::string desc = "halfspace" + join(normal);
    return {[normal, b](std::span<const double> x) {
                double s = 0.0;
                for (std::size_t i = 0; i < normal.size(); ++i) s += normal[i] * x[i];
                return s - b;
            },
            std::move(desc)};
}

ImplicitSurface norm_to_point(std::vector<double> point, std::vector<std::size_t> dims) {
    dims = resolve_dims(std::move(dims), point.size());
    std::string desc = "norm" + join(point);
    return {[point, dims](std::span<const double> x) {
                double s = 0.0;
                for (std::size_t i = 0; i < dims.size(); ++i) {
                    const double a = x[dims[i]] - point[i];
                    s += a * a;
                }
                return std::sqrt(s);
            },
            std::move(desc)};
}

ImplicitSurface constant_surface(double value) {
    return {[value](std::span<const double>) { return value; }, "constant"};
}

ImplicitSurface set_union(ImplicitSurface a, ImplicitSurface b) {
    std::string desc = "union(" + a.description + "," + b.description + ")";
    return {[a = std::move(a.evaluator), b = std::move(b.evaluator)](std::span<const double> x) {
                return std::min(a(x), b(x));
            },
            std::move(desc)};
}

ImplicitSurface set_intersection(ImplicitSurface a, ImplicitSurface b) {
    std::string desc = "intersection(" + a.description + "," + b.description + ")";
    return {[a = std::move(a.evaluator), b = std::move(b.evaluator)](std::span<const double> x) {
                return std::max(a(x), b(x));
            },
            std::move(desc)};
}

ImplicitSurface complement(ImplicitSurface a) {
    std::string desc = "complement(" + a.description + ")";
    return {[a = std::move(a.evaluator)](std::span<const double> x) { return -a(x); }, std::move(desc)};
}

ImplicitSurface offset(ImplicitSurface a, double k) {
    std::string desc = "offset(" + a.description + ")";
    return {[a = std::move(a.evaluator), k](std::span<const double> x) { return a(x) + k; }, std::move(desc)};
}

ScalarField sample_to_field(const ImplicitSurface& surface, const Grid& grid) {
    ScalarField field(grid);
    std::vector<double> x(grid.dims());
    for (std::size_t node = 0; node < grid.size(); ++node) {
        grid.point(node, x);
        const double v = surface(x);
        if (std::isnan(v)) {
            throw DomainError("surface '" + surface.description + "' evaluated to NaN at node " +
                              std::to_string(node));
        }
        field[node] = v;
    }
    return field;
}

double lipschitz_estimate(const ImplicitSurface& surface, const Grid& grid) {
    const ScalarField f = sample_to_field(surface, grid);
    std::vector<std::size_t> idx(grid.dims());
    double slope = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
        grid.unravel(node, idx);
        for (std::size_t d = 0; d < grid.dims(); ++d) {
            const Axis& a = grid.axis(d);
            std::size_t next;
            if (idx[d] + 1 < a.count) {
                next = node + grid.stride(d);
            } else if (a.periodic) {
                next = node - idx[d] * grid.stride(d);
            } else {
                continue;
            }
            slope = std::max(slope, std::abs(f[next] - f[node]) / a.spacing);
        }
    }
    return slope;
}

ImplicitSurface build_surface(const SurfaceExpr& e) {
    const auto need_args = [&](std::size_t lo, std::size_t hi) {
        if (e.args.size() < lo || e.args.size() > hi) {
            throw DomainError("surface '" + e.kind + "' has the wrong number of arguments");
        }
    };
    if (e.kind == "circle") return circle(e.center, e.radius, e.dims.empty() ? std::vector<std::size_t>{0, 1} : e.dims);
    if (e.kind == "box") return box(e.center, e.half_widths, e.dims);
    if (e.kind == "sphere") return sphere(e.center, e.radius, e.dims);
    if (e.kind == "box_sdf") return box_sdf(e.center, e.half_widths, e.dims);
    if (e.kind == "halfspace") return halfspace(e.normal, e.value);
    if (e.kind == "norm_to_point") return norm_to_point(e.center, e.dims);
    if (e.kind == "constant") return constant_surface(e.value);
    if (e.kind == "union" || e.kind == "intersection") {
        need_args(1, SIZE_MAX);
        ImplicitSurface acc = build_surface(e.args[0]);
        for (std::size_t i = 1; i < e.args.size(); ++i) {
            acc = e.kind == "union" ? set_union(std::move(acc), build_surface(e.args[i]))
                                    : set_intersection(std::move(acc), build_surface(e.args[i]));
        }
        return acc;
    }
    if (e.kind == "complement") {
        need_args(1, 1);
        return complement(build_surface(e.args[0]));
    }
    if (e.kind == "offset") {
        need_args(1, 1);
        return offset(build_surface(e.args[0]), e.value);
    }
    throw DomainError("unknown surface kind '" + e.kind + "'");
}

}  // namespace dreach
