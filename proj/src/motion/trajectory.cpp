#include "asp/motion/trajectory.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "asp/core/error.hpp"

namespace asp::motion {

double se3_distance(const Pose& a, const Pose& b, double rot_weight) {
    return (a.t - b.t).norm() + rot_weight * a.rotation_angle_to(b);
}

double Trajectory::length(double rot_weight) const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        total += se3_distance(waypoints[i], waypoints[i + 1], rot_weight);
    }
    return total;
}

bool trajectory_collision_free(const TriMesh& part, const Trajectory& traj,
                               std::span<const PosedMesh> obstacles, double clearance,
                               double resolution, double rot_weight) {
    if (traj.waypoints.empty()) return false;
    if (resolution <= 0.0) throw InvalidInputError("trajectory resolution must be > 0");
    if (geom::in_collision_with_any(part, traj.waypoints.front(), obstacles, clearance)) {
        return false;
    }
    for (std::size_t i = 0; i + 1 < traj.waypoints.size(); ++i) {
        const Pose& a = traj.waypoints[i];
        const Pose& b = traj.waypoints[i + 1];
        const double d = se3_distance(a, b, rot_weight);
        const int n = std::max(1, static_cast<int>(std::ceil(d / resolution)));
        for (int k = 1; k <= n; ++k) {
            const Pose p = geom::interpolate(a, b, static_cast<double>(k) / n);
            if (geom::in_collision_with_any(part, p, obstacles, clearance)) return false;
        }
    }
    return true;
}

nlohmann::json trajectory_to_json(const Trajectory& traj) {
    nlohmann::json wp = nlohmann::json::array();
    for (const auto& p : traj.waypoints) wp.push_back(geom::pose_to_json(p));
    return nlohmann::json{
        {"part_id", traj.part_id}, {"resolution", traj.step_resolution}, {"waypoints", wp}};
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
    Trajectory traj;
    traj.part_id = j.at("part_id").get<int>();
    traj.step_resolution = j.at("resolution").get<double>();
    for (const auto& p : j.at("waypoints")) traj.waypoints.push_back(geom::pose_from_json(p));
    return traj;
}

} // namespace asp::motion
