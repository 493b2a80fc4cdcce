#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace dreach {

/// One Cartesian axis of a grid. For periodic axes the node at `upper` is the
/// same as the node at `lower` and is not stored.
struct Axis {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t count = 3;
    bool periodic = false;
    double spacing = 0.5;

    double coordinate(std::size_t i) const { return lower + static_cast<double>(i) * spacing; }
    double period() const { return upper - lower; }

    bool operator==(const Axis&) const = default;
};

/// Rectangular node lattice, row-major with dimension 0 slowest.
class Grid {
public:
    Grid() = default;
    explicit Grid(std::vector<Axis> axes);

    std::size_t dims() const { return axes_.size(); }
    const Axis& axis(std::size_t d) const { return axes_[d]; }
    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t size() const { return size_; }
    std::size_t stride(std::size_t d) const { return strides_[d]; }

    void unravel(std::size_t node, std::span<std::size_t> idx) const;
    std::size_t ravel(std::span<const std::size_t> idx) const;

    /// Coordinates of a node.
    std::vector<double> point(std::size_t node) const;
    void point(std::size_t node, std::span<double> out) const;

    std::vector<double> spacing() const;
    double min_spacing() const;

    /// Maps periodic coordinates into [lower, upper); other coordinates untouched.
    void wrap(std::span<double> x) const;

    /// True when x lies inside the box on every non-periodic dimension.
    bool contains(std::span<const double> x) const;

    bool operator==(const Grid& other) const { return axes_ == other.axes_; }

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// Validated grid construction. Throws DomainError on unordered bounds,
/// counts below 3, or mismatched argument lengths.
Grid build_grid(std::span<const std::pair<double, double>> bounds,
                std::span<const std::size_t> counts,
                const std::vector<bool>& periodic);

/// One value per grid node.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(Grid grid, double fill = 0.0);
    ScalarField(Grid grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool all_finite() const;
    double min() const;
    double max() const;
    double sup_norm() const;

    bool operator==(const ScalarField&) const = default;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Throws GridMismatch naming `what` if the two fields live on different grids.
void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what);

/// max_i |a_i - b_i|.
double sup_distance(const ScalarField& a, const ScalarField& b);

enum class DerivativeOrder { first = 1, weno5 = 5 };

/// One-sided derivative approximations, indexed [dim][node].
struct GradientPair {
    std::vector<std::vector<double>> left;
    std::vector<std::vector<double>> right;
};

/// Left/right derivative approximations at every node. Non-periodic
/// boundaries use linear-extrapolation ghost cells; periodic ones wrap.
GradientPair upwind_gradients(const ScalarField& field, DerivativeOrder order);

/// Same as upwind_gradients, writing into a preallocated pair.
void upwind_gradients_into(const ScalarField& field, DerivativeOrder order, GradientPair& out);

/// Corner nodes and weights of the multilinear interpolant at a point.
struct Stencil {
    std::vector<std::size_t> nodes;
    std::vector<double> weights;
    bool clamped = false;
};

Stencil make_stencil(const Grid& grid, std::span<const double> point);

double apply_stencil(const Stencil& stencil, std::span<const double> values);

/// Multilinear interpolation. Periodic coordinates wrap; coordinates outside
/// non-periodic bounds are clamped to the boundary (reported via `clamped`).
double interpolate(const ScalarField& field, std::span<const double> point);
double interpolate(const ScalarField& field, std::span<const double> point, bool& clamped);

/// Central-difference gradient at the nodes, multilinearly interpolated to
/// `point`. One-sided differences on non-periodic boundaries.
std::vector<double> gradient_at(const ScalarField& field, std::span<const double> point);

/// Central-difference gradient at one node.
void node_gradient(const ScalarField& field, std::size_t node, std::span<double> out);

}  // namespace dreach
