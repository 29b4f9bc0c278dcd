#pragma once

#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "asp/geom/queries.hpp"

namespace asp::motion {

using geom::Pose;
using geom::PosedMesh;
using geom::TriMesh;
using geom::Vec3;

// Weighted SE(3) metric: translation distance plus rot_weight (meters/radian)
// times the geodesic rotation angle.
double se3_distance(const Pose& a, const Pose& b, double rot_weight);

struct Trajectory {
    int part_id = -1;
    std::vector<Pose> waypoints;
    double step_resolution = 0.0; // metric spacing of validated samples

    const Pose& start() const { return waypoints.front(); }
    const Pose& goal() const { return waypoints.back(); }
    double length(double rot_weight) const;
};

// Checks every interpolated pose between consecutive waypoints, sampled at
// most `resolution` apart in the weighted metric (endpoints included).
bool trajectory_collision_free(const TriMesh& part, const Trajectory& traj,
                               std::span<const PosedMesh> obstacles, double clearance,
                               double resolution, double rot_weight);

nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);

} // namespace asp::motion
