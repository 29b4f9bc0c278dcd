#pragma once

#include <optional>
#include <vector>

#include "asp/motion/rrt_connect.hpp"

namespace asp::motion {

// Optional per-part admissible path (e.g. the reversed removal sweep from the
// enumeration planner), used as a fallback when RRT-connect fails.
struct SeedPath {
    int part_id = -1;
    std::vector<Pose> waypoints; // from an escape pose down to the target pose
};

struct MotionPlanResult {
    bool success = false;
    int failed_index = -1; // k of the failing part when !success
    std::vector<Trajectory> trajectories;
    long total_iterations = 0;
};

// Parts staged grid-packed on a virtual plane below the assembly, two
// bounding-sphere radii away, in canonical orientation.
std::vector<Pose> default_resting_poses(const std::vector<const TriMesh*>& meshes,
                                        const std::vector<Pose>& target_poses);

// Plans each part of the sequence in order; obstacles are the already
// assembled parts at their target poses. All-or-nothing.
MotionPlanResult plan_all_motions(const std::vector<int>& order,
                                  const std::vector<const TriMesh*>& meshes,
                                  const std::vector<Pose>& resting_poses,
                                  const std::vector<Pose>& target_poses, const RrtConfig& config,
                                  const std::vector<SeedPath>* seed_paths = nullptr);

} // namespace asp::motion
