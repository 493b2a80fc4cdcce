#pragma once

#include <cstdint>
#include <random>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dreach/dynamics.hpp"
#include "dreach/level_set.hpp"
#include "dreach/rclvf.hpp"

namespace dreach {

enum class DisturbanceKind { worst_case, zero, seeded_random };

struct DisturbancePolicy {
    DisturbanceKind kind = DisturbanceKind::worst_case;
    std::uint64_t seed = 0;

    bool operator==(const DisturbancePolicy&) const = default;
};

struct ControlDecision {
    std::vector<double> u;
    std::vector<double> d;        // worst-case disturbance for the same gradient
    std::vector<double> gradient;
    double value = 0.0;           // value of the field the gradient came from
    std::size_t slice = 0;        // snapshot index (pi_RA only)
    bool fallback = false;        // no slice had value <= 0; largest horizon used
    bool clamped = false;         // state outside a non-periodic grid bound
};

/// pi_RA: picks the snapshot with the smallest time-to-go whose value at x
/// is <= 0 and returns the saddle inputs for its gradient.
ControlDecision controller_ra(std::span<const double> x, const std::vector<Snapshot>& snapshots,
                              const DynamicsSpec& dyn);

/// pi_H: saddle inputs for the R-CLVF gradient. Throws OutsideDomain where
/// the R-CLVF is at the divergence cap.
ControlDecision controller_h(std::span<const double> x, const RclvfResult& rclvf, const DynamicsSpec& dyn);

/// Disturbance from the zero or seeded_random policy; `rng` advances only
/// for seeded_random.
std::vector<double> policy_disturbance(const DisturbancePolicy& policy, const InputBox& box,
                                       std::mt19937_64& rng);

enum class RolloutMode { ra, sa };
enum class Phase { ra_phase, stabilize_phase };

const char* to_string(Phase phase);

/// Samples at t_k = k dt. Row k holds the inputs applied on [t_k, t_k + dt];
/// the last row holds the decision at the final state.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> controls;
    std::vector<std::vector<double>> disturbances;
    std::vector<double> values;
    std::vector<Phase> modes;
    bool clamped = false;         // left the grid at some point
    std::size_t fallbacks = 0;    // pi_RA steps outside every stored slice
    bool outside_domain = false;  // pi_H queried where the R-CLVF is capped
};

struct RolloutSpec {
    RolloutMode mode = RolloutMode::ra;
    DisturbancePolicy disturbance;
    double dt = 0.05;
    double t_end = 10.0;
};

/// Closed-loop simulation. In sa mode pi_RA runs until the shifted R-CLVF at
/// the state first drops to <= 0, then pi_H holds for the rest of the run.
/// `rclvf` may be null in ra mode.
Trajectory rollout(std::span<const double> x0, const RolloutSpec& spec, const std::vector<Snapshot>& snapshots,
                   const RclvfResult* rclvf, const DynamicsSpec& dyn);

/// Header "t,x0..,u0..,d0..,value,mode", then one line per sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace dreach
