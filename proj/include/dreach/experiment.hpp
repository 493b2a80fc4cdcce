#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dreach/control_synthesis.hpp"
#include "dreach/dynamics.hpp"
#include "dreach/geometry.hpp"
#include "dreach/grid.hpp"
#include "dreach/hji_solver.hpp"
#include "dreach/rclvf.hpp"

namespace dreach {

/// Coefficient tables of xdot = A x + b + B u + E d (row-major).
struct AffineTables {
    std::size_t n_dims = 0;
    std::vector<double> a, b;
    std::vector<double> control_matrix;
    InputBox control_bounds;
    std::vector<double> disturbance_matrix;
    InputBox disturbance_bounds;

    bool operator==(const AffineTables&) const = default;
};

/// Built-in system by name (dubins3d, integrator1d, double_integrator2d) with
/// optional scalar parameters, or "linear_affine" with coefficient tables.
struct SystemConfig {
    std::string name;
    std::map<std::string, double> params;
    std::optional<AffineTables> affine;

    bool operator==(const SystemConfig&) const = default;
};

struct GridConfig {
    std::vector<double> lower, upper;
    std::vector<std::size_t> counts;
    std::vector<bool> periodic;

    bool operator==(const GridConfig&) const = default;
};

struct RolloutConfig {
    std::vector<std::vector<double>> x0;
    double dt = 0.05;
    double t_end = 10.0;
    RolloutMode mode = RolloutMode::ra;
    DisturbancePolicy disturbance;

    bool operator==(const RolloutConfig&) const = default;
};

struct ExperimentConfig {
    std::string name;
    SystemConfig system;
    GridConfig grid;
    SurfaceExpr target;
    SurfaceExpr constraint;
    SolverConfig solver;  // solver.gamma is the top-level "gamma" key
    std::optional<StabilizeSpec> stabilize;
    RolloutConfig rollout;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses JSON text. Throws ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Pretty-printed JSON; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// Semantic checks: ordered bounds, known system, surfaces within the state
/// dimension, solver and stabilization settings. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

DynamicsSpec make_dynamics(const SystemConfig& sys);
Grid make_grid(const GridConfig& g);

const char* to_string(DerivativeOrder order);
const char* to_string(NumericalHamiltonian scheme);
const char* to_string(RolloutMode mode);
const char* to_string(DisturbanceKind kind);

}  // namespace dreach
