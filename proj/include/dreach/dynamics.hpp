#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dreach/grid.hpp"

namespace dreach {

/// Axis-aligned box of admissible inputs, one interval per channel.
struct InputBox {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }
    double midpoint(std::size_t i) const { return 0.5 * (lower[i] + upper[i]); }
    double magnitude(std::size_t i) const;  // max(|lower|, |upper|)

    bool operator==(const InputBox&) const = default;
};

using VectorMap = std::function<void(std::span<const double> x, std::span<double> out)>;
using GeneralField = std::function<void(std::span<const double> x, std::span<const double> u,
                                        std::span<const double> d, std::span<double> out)>;

/// Control-affine dynamics xdot = drift(x) + B(x) u + E(x) d with box inputs.
/// Jacobians are written row-major (n_dims x channels).
///
/// A system may instead provide `general_field`; the Hamiltonian and optimal
/// inputs are then found by sampling the input boxes (`input_samples` points
/// per channel, endpoints included).
struct DynamicsSpec {
    std::string name;
    std::size_t n_dims = 0;
    VectorMap drift;
    VectorMap control_jacobian;
    VectorMap disturbance_jacobian;
    InputBox control_bounds;
    InputBox disturbance_bounds;
    double lipschitz_estimate = 0.0;
    std::vector<std::size_t> angle_dims;  // wrapped into [-pi, pi) after each flow step

    GeneralField general_field;
    std::size_t input_samples = 11;

    std::size_t n_controls() const { return control_bounds.size(); }
    std::size_t n_disturbances() const { return disturbance_bounds.size(); }
    bool is_affine() const { return !general_field; }

    /// f(x, u, d).
    void evaluate(std::span<const double> x, std::span<const double> u, std::span<const double> d,
                  std::span<double> out) const;
    std::vector<double> evaluate(std::span<const double> x, std::span<const double> u,
                                 std::span<const double> d) const;
};

/// Throws DomainError if bounds are empty boxes or sizes are inconsistent.
void validate(const DynamicsSpec& dyn);

// Built-in systems.
DynamicsSpec dubins3d(double speed = 1.0, double turn_rate = 3.141592653589793, double disturbance = 0.2);
DynamicsSpec integrator1d(double control = 1.0, double disturbance = 0.2);
DynamicsSpec double_integrator2d(double control = 1.0, double disturbance = 0.2);
DynamicsSpec zero_dynamics(std::size_t n_dims, std::size_t n_controls = 1, std::size_t n_disturbances = 1);

/// xdot = A x + b + B u + E d with constant coefficient tables (row-major).
DynamicsSpec linear_affine(std::size_t n_dims, std::vector<double> a, std::vector<double> b,
                           std::vector<double> control_matrix, InputBox control_bounds,
                           std::vector<double> disturbance_matrix, InputBox disturbance_bounds);

struct OptimalInputs {
    std::vector<double> u;
    std::vector<double> d;
};

/// max_d min_u p . f(x, u, d).
double hamiltonian(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> p);

/// Componentwise upper bound on |f_i(x, u, d)| over the input boxes.
std::vector<double> dissipation_bounds(const DynamicsSpec& dyn, std::span<const double> x);

/// Saddle-point inputs of the Hamiltonian. Zero switching coefficients resolve
/// to the box midpoint.
OptimalInputs optimal_inputs(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> p);

/// One RK4 step with u, d held constant; angle dimensions wrapped afterwards.
std::vector<double> flow(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> u,
                         std::span<const double> d, double dt);

/// Dynamics data evaluated once per grid node for the level-set sweeps.
class NodeDynamics {
public:
    NodeDynamics(const DynamicsSpec& dyn, const Grid& grid);

    double hamiltonian(std::size_t node, std::span<const double> p) const;
    std::span<const double> alpha(std::size_t node) const {
        return {alpha_.data() + node * n_, n_};
    }
    /// max over nodes of alpha per dimension.
    const std::vector<double>& max_alpha() const { return max_alpha_; }

    /// True when every control and disturbance channel drives a single state
    /// dimension, so H(x, p) = sum_i h_i(x, p_i) with each h_i piecewise
    /// linear and kinked only at p_i = 0.
    bool separable() const { return separable_; }
    /// Godunov numerical Hamiltonian from one-sided gradients (separable only).
    /// ext over p_i between left_i and right_i of h_i: max when left <= right,
    /// min otherwise (time-to-go form dW/dtau = H).
    double godunov_hamiltonian(std::size_t node, std::span<const double> left, std::span<const double> right) const;

private:
    void build_separable_slopes();

    DynamicsSpec dyn_;
    Grid grid_;
    std::size_t n_, mu_, md_;
    bool affine_;
    bool separable_ = false;
    std::vector<double> drift_, b_, e_, alpha_, max_alpha_;
    std::vector<double> slope_pos_, slope_neg_;  // dh_i/dp_i for p_i > 0 and p_i < 0
    std::vector<double> u_lo_, u_hi_, d_lo_, d_hi_;
};

}  // namespace dreach
