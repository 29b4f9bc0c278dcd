#include "asp/motion/plan_all.hpp"

#include <algorithm>
#include <cmath>

#include "asp/core/error.hpp"

namespace asp::motion {

namespace {

using geom::Aabb;
using geom::Vec3;

void assembly_bounding_sphere(const std::vector<const TriMesh*>& meshes,
                              const std::vector<Pose>& target_poses, Vec3* center,
                              double* radius) {
    Aabb box;
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        box.expand(meshes[i]->bounds().transformed(target_poses[i]));
    }
    *center = box.center();
    *radius = 0.5 * box.extent().norm();
}

} // namespace

std::vector<Pose> default_resting_poses(const std::vector<const TriMesh*>& meshes,
                                        const std::vector<Pose>& target_poses) {
    if (meshes.empty()) return {};
    Vec3 center;
    double radius = 0.0;
    assembly_bounding_sphere(meshes, target_poses, &center, &radius);

    double max_part_radius = 0.0;
    for (const auto* m : meshes) max_part_radius = std::max(max_part_radius, m->bounding_radius());
    const double cell = std::max(2.2 * max_part_radius, 1e-3);
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(meshes.size()))));
    const double plane_z = center.z() - 2.0 * std::max(radius, 1e-6) - max_part_radius;

    std::vector<Pose> resting(meshes.size());
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        const int row = static_cast<int>(i) / cols;
        const int col = static_cast<int>(i) % cols;
        Pose p;
        p.t = Vec3(center.x() + (col - 0.5 * (cols - 1)) * cell,
                   center.y() + (row - 0.5 * (cols - 1)) * cell, plane_z);
        // canonical orientation: identity rotation, mesh origin on the plane
        resting[i] = p;
    }
    return resting;
}

MotionPlanResult plan_all_motions(const std::vector<int>& order,
                                  const std::vector<const TriMesh*>& meshes,
                                  const std::vector<Pose>& resting_poses,
                                  const std::vector<Pose>& target_poses, const RrtConfig& config,
                                  const std::vector<SeedPath>* seed_paths) {
    MotionPlanResult result;
    const std::size_t m = meshes.size();
    {
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] != static_cast<int>(i) || order.size() != m) {
                throw InvalidInputError("sequence order is not a permutation of the parts");
            }
        }
    }

    std::vector<PosedMesh> assembled;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int part_id = order[k];
        const TriMesh& part = *meshes[static_cast<std::size_t>(part_id)];
        RrtConfig cfg = config;
        cfg.seed = config.seed ^ (0x9E3779B97F4A7C15ULL * (k + 1));
        RrtStats stats;
        std::optional<Trajectory> traj;
        try {
            traj = plan_part_motion(part, resting_poses[static_cast<std::size_t>(part_id)],
                                    target_poses[static_cast<std::size_t>(part_id)], assembled,
                                    cfg, &stats);
        } catch (const InvalidInputError&) {
            traj.reset();
        }
        result.total_iterations += stats.iterations;

        if (!traj && seed_paths) {
            // Fallback: plan to the seed path's entry pose, then ride it down.
            const SeedPath* seed = nullptr;
            for (const auto& s : *seed_paths) {
                if (s.part_id == part_id) seed = &s;
            }
            if (seed && !seed->waypoints.empty()) {
                RrtConfig entry_cfg = cfg;
                entry_cfg.seed = cfg.seed ^ 0xF00DULL;
                RrtStats entry_stats;
                std::optional<Trajectory> entry;
                try {
                    entry = plan_part_motion(part,
                                             resting_poses[static_cast<std::size_t>(part_id)],
                                             seed->waypoints.front(), assembled, entry_cfg,
                                             &entry_stats);
                } catch (const InvalidInputError&) {
                    entry.reset();
                }
                result.total_iterations += entry_stats.iterations;
                if (entry) {
                    Trajectory full = *entry;
                    full.part_id = part_id;
                    full.waypoints.insert(full.waypoints.end(), seed->waypoints.begin() + 1,
                                          seed->waypoints.end());
                    const double rot_weight = part.bounding_radius();
                    if (trajectory_collision_free(part, full, assembled, cfg.clearance,
                                                  full.step_resolution / 2.0, rot_weight)) {
                        traj = std::move(full);
                    }
                }
            }
        }

        if (!traj) {
            result.failed_index = static_cast<int>(k);
            return result;
        }
        traj->part_id = part_id;
        result.trajectories.push_back(std::move(*traj));
        assembled.push_back({&part, target_poses[static_cast<std::size_t>(part_id)]});
    }
    result.success = true;
    return result;
}

} // namespace asp::motion
