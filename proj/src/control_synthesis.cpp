#include "dreach/control_synthesis.hpp"

#include <cmath>
#include <iomanip>

#include "dreach/errors.hpp"

namespace dreach {

namespace {

ControlDecision decide(std::span<const double> x, const ScalarField& field, const DynamicsSpec& dyn) {
    ControlDecision out;
    out.value = interpolate(field, x, out.clamped);
    out.gradient = gradient_at(field, x);
    auto opt = optimal_inputs(dyn, x, out.gradient);
    out.u = std::move(opt.u);
    out.d = std::move(opt.d);
    return out;
}

}  // namespace

ControlDecision controller_ra(std::span<const double> x, const std::vector<Snapshot>& snapshots,
                              const DynamicsSpec& dyn) {
    if (snapshots.empty()) throw DomainError("controller_ra needs at least one snapshot");
    std::size_t pick = snapshots.size() - 1;
    bool found = false;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        if (interpolate(snapshots[k].field, x) <= 0.0) {
            pick = k;
            found = true;
            break;
        }
    }
    auto out = decide(x, snapshots[pick].field, dyn);
    out.slice = pick;
    out.fallback = !found;
    return out;
}

ControlDecision controller_h(std::span<const double> x, const RclvfResult& rclvf, const DynamicsSpec& dyn) {
    auto out = decide(x, rclvf.field, dyn);
    if (out.value >= rclvf.cap) throw OutsideDomain("state lies outside the R-CLVF domain");
    return out;
}

std::vector<double> policy_disturbance(const DisturbancePolicy& policy, const InputBox& box, std::mt19937_64& rng) {
    std::vector<double> d(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) {
        const double lo = box.lower[k], hi = box.upper[k];
        switch (policy.kind) {
            case DisturbanceKind::zero:
                d[k] = (lo <= 0.0 && hi >= 0.0) ? box.midpoint(k) : (hi < 0.0 ? hi : lo);
                break;
            case DisturbanceKind::seeded_random:
                d[k] = std::uniform_real_distribution<double>(lo, hi)(rng);
                break;
            case DisturbanceKind::worst_case:
                throw DomainError("worst-case disturbance depends on the value gradient");
        }
    }
    return d;
}

const char* to_string(Phase phase) { return phase == Phase::ra_phase ? "ra_phase" : "stabilize_phase"; }

Trajectory rollout(std::span<const double> x0, const RolloutSpec& spec, const std::vector<Snapshot>& snapshots,
                   const RclvfResult* rclvf, const DynamicsSpec& dyn) {
    if (!(spec.dt > 0.0)) throw DomainError("rollout dt must be positive");
    if (!(spec.t_end >= 0.0)) throw DomainError("rollout t_end must be nonnegative");
    if (x0.size() != dyn.n_dims) throw DomainError("initial state has the wrong dimension");
    if (spec.mode == RolloutMode::sa && rclvf == nullptr) throw DomainError("sa rollout needs an R-CLVF");
    if (spec.mode == RolloutMode::ra && snapshots.empty()) throw DomainError("ra rollout needs snapshots");

    std::mt19937_64 rng(spec.disturbance.seed);
    Trajectory traj;
    std::vector<double> x(x0.begin(), x0.end());
    Phase phase = Phase::ra_phase;
    const auto steps = static_cast<std::size_t>(std::llround(spec.t_end / spec.dt));
    for (std::size_t k = 0; k <= steps; ++k) {
        if (spec.mode == RolloutMode::sa && phase == Phase::ra_phase) {
            if (interpolate(rclvf->shifted_field, x) <= 0.0) phase = Phase::stabilize_phase;
        }
        ControlDecision dec;
        if (phase == Phase::stabilize_phase) {
            dec = decide(x, rclvf->field, dyn);
            if (dec.value >= rclvf->cap) traj.outside_domain = true;
            dec.value = interpolate(rclvf->shifted_field, x);
        } else {
            dec = controller_ra(x, snapshots, dyn);
            traj.fallbacks += dec.fallback;
        }
        traj.clamped = traj.clamped || dec.clamped;
        std::vector<double> d = spec.disturbance.kind == DisturbanceKind::worst_case
                                    ? dec.d
                                    : policy_disturbance(spec.disturbance, dyn.disturbance_bounds, rng);
        traj.times.push_back(static_cast<double>(k) * spec.dt);
        traj.states.push_back(x);
        traj.values.push_back(dec.value);
        traj.modes.push_back(phase);
        if (k < steps) x = flow(dyn, x, dec.u, d, spec.dt);
        traj.controls.push_back(std::move(dec.u));
        traj.disturbances.push_back(std::move(d));
    }
    return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    if (traj.states.empty()) return;
    out << 't';
    for (std::size_t i = 0; i < traj.states[0].size(); ++i) out << ",x" << i;
    for (std::size_t i = 0; i < traj.controls[0].size(); ++i) out << ",u" << i;
    for (std::size_t i = 0; i < traj.disturbances[0].size(); ++i) out << ",d" << i;
    out << ",value,mode\n" << std::setprecision(17);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << traj.times[k];
        for (double v : traj.states[k]) out << ',' << v;
        for (double v : traj.controls[k]) out << ',' << v;
        for (double v : traj.disturbances[k]) out << ',' << v;
        out << ',' << traj.values[k] << ',' << to_string(traj.modes[k]) << '\n';
    }
}

}  // namespace dreach
