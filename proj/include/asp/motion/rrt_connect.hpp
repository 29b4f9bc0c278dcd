#pragma once

#include <cstdint>
#include <optional>

#include "asp/motion/trajectory.hpp"

namespace asp::motion {

struct RrtConfig {
    int max_iters = 4000;
    double step_size = 0.0;        // metric; 0 = auto (half the part bounding radius)
    double goal_bias_connect = 0.1; // probability of aiming a sample at the other tree
    std::uint64_t seed = 0;
    int smoothing_rounds = 100;
    double clearance = geom::kPlanningClearance;
};

struct RrtStats {
    int iterations = 0;
    bool connected = false;
};

// Bidirectional RRT-connect for a free-flying rigid part in SE(3).
// Deterministic for a fixed seed. Throws InvalidInputError when start or goal
// already collide; returns nullopt with stats when the budget runs out.
std::optional<Trajectory> plan_part_motion(const TriMesh& part, const Pose& start,
                                           const Pose& goal,
                                           std::span<const PosedMesh> obstacles,
                                           const RrtConfig& config, RrtStats* stats = nullptr);

// Shortcut smoothing; never increases the metric path length. Candidate
// shortcuts are validated at the trajectory's own resolution.
void smooth_trajectory(const TriMesh& part, Trajectory& traj,
                       std::span<const PosedMesh> obstacles, double clearance, double rot_weight,
                       int rounds, std::uint64_t seed);

} // namespace asp::motion
