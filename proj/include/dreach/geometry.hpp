#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dreach/grid.hpp"

namespace dreach {

// Implicit surfaces follow the negative-inside convention: value < 0 iff the
// state is in the represented set.

struct ImplicitSurface {
    std::function<double(std::span<const double>)> evaluator;
    std::string description;

    double operator()(std::span<const double> x) const { return evaluator(x); }
};

/// (x_i - c_i)^2 + (x_j - c_j)^2 - radius^2 over dims {i, j}. Quadratic, not a
/// signed distance.
ImplicitSurface circle(std::vector<double> center, double radius, std::vector<std::size_t> dims = {0, 1});

/// 1 - max_i |x_i - c_i| / h_i. Positive inside the box, so the represented
/// set is the outside of the box (an obstacle written as a safe region).
ImplicitSurface box(std::vector<double> center, std::vector<double> half_widths,
                    std::vector<std::size_t> dims = {});

/// Signed distance to a ball: ||x_S - c|| - radius.
ImplicitSurface sphere(std::vector<double> center, double radius, std::vector<std::size_t> dims = {});

/// Signed distance to an axis-aligned box, negative inside.
ImplicitSurface box_sdf(std::vector<double> center, std::vector<double> half_widths,
                        std::vector<std::size_t> dims = {});

/// normal . x - offset (normal normalised to unit length).
ImplicitSurface halfspace(std::vector<double> normal, double offset);

/// ||x_S - p||.
ImplicitSurface norm_to_point(std::vector<double> point, std::vector<std::size_t> dims = {});

ImplicitSurface constant_surface(double value);

ImplicitSurface set_union(ImplicitSurface a, ImplicitSurface b);         // pointwise min
ImplicitSurface set_intersection(ImplicitSurface a, ImplicitSurface b);  // pointwise max
ImplicitSurface complement(ImplicitSurface a);                           // negation
ImplicitSurface offset(ImplicitSurface a, double k);                     // a + k

/// Evaluates the surface at every node. Throws DomainError on NaN.
ScalarField sample_to_field(const ImplicitSurface& surface, const Grid& grid);

/// Largest finite-difference slope between axis neighbours over the grid.
double lipschitz_estimate(const ImplicitSurface& surface, const Grid& grid);

/// Serializable expression tree for surfaces.
///
/// kind: circle | box | sphere | box_sdf | halfspace | norm_to_point |
///       constant | union | intersection | complement | offset
struct SurfaceExpr {
    std::string kind;
    std::vector<double> center;       // circle, box, sphere, box_sdf, norm_to_point
    std::vector<double> half_widths;  // box, box_sdf
    std::vector<double> normal;       // halfspace
    std::vector<std::size_t> dims;    // selected state dimensions (empty = leading dims)
    double radius = 0.0;              // circle, sphere
    double value = 0.0;               // constant value, halfspace offset, offset amount
    std::vector<SurfaceExpr> args;    // union/intersection (>= 1), complement/offset (1)

    bool operator==(const SurfaceExpr&) const = default;
};

ImplicitSurface build_surface(const SurfaceExpr& expr);

}  // namespace dreach
