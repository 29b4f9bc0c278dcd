#include "asp/contact/plan_contacts.hpp"

#include <nlohmann/json.hpp>

#include "asp/core/error.hpp"
#include "asp/geom/point_cloud.hpp"

namespace asp::contact {

namespace {

using geom::PointCloud;
using geom::Pose;
using geom::PosedMesh;
using geom::TriMesh;
using geom::Vec3;

bool grasp_survives_trajectory(const GraspPair& local_pair, const motion::Trajectory& traj,
                               std::span<const PosedMesh> assembled, double min_distance) {
    for (const auto& wp : traj.waypoints) {
        const Vec3 a = wp.apply(local_pair.point_a);
        const Vec3 b = wp.apply(local_pair.point_b);
        for (const auto& obs : assembled) {
            if (geom::point_mesh_distance(a, *obs.mesh, obs.pose) < min_distance) return false;
            if (geom::point_mesh_distance(b, *obs.mesh, obs.pose) < min_distance) return false;
        }
    }
    return true;
}

} // namespace

ContactPlanResult plan_contacts(const std::vector<int>& order,
                                const std::vector<motion::Trajectory>& trajectories,
                                const std::vector<const geom::TriMesh*>& meshes,
                                const std::vector<geom::Pose>& target_poses,
                                const std::vector<geom::InertialProps>& props,
                                const ContactConfig& config) {
    if (order.size() != trajectories.size()) {
        throw InvalidInputError("plan_contacts: order/trajectory size mismatch");
    }
    ContactPlanResult result;
    std::vector<PosedMesh> assembled;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const int part_id = order[k];
        const TriMesh& mesh = *meshes[static_cast<std::size_t>(part_id)];
        const geom::InertialProps& inertial = props[static_cast<std::size_t>(part_id)];
        const motion::Trajectory& traj = trajectories[k];

        // Part surface cloud in the local frame; grasp geometry rides along
        // with the part, so enumeration happens once per part.
        const PointCloud cloud = geom::sample_point_cloud(
            mesh, Pose::identity(), config.cloud_points,
            config.seed ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(part_id)));
        const std::vector<GraspPair> pairs =
            enumerate_grasp_pairs(cloud, config.mu, config.antipodal_tol_deg,
                                  inertial.center_of_mass, mesh.bounding_radius());

        const double min_distance = config.clearance + config.gripper_radius;
        const GraspPair* chosen = nullptr;
        for (const auto& pair : pairs) {
            if (grasp_survives_trajectory(pair, traj, assembled, min_distance)) {
                chosen = &pair;
                break;
            }
        }

        ContactAssignment assignment;
        assignment.part_id = part_id;
        if (chosen) {
            assignment.is_grasp = true;
            assignment.grasp = *chosen;
            // report contact points in world coordinates at the final pose
            const Pose& final_pose = traj.waypoints.back();
            assignment.grasp.point_a = final_pose.apply(chosen->point_a);
            assignment.grasp.point_b = final_pose.apply(chosen->point_b);
            assignment.grasp.normal_a = final_pose.rotate(chosen->normal_a);
            assignment.grasp.normal_b = final_pose.rotate(chosen->normal_b);
        } else {
            // Worst-case wrench over the trajectory (ties: lowest index).
            int worst = 0;
            double worst_norm = -1.0;
            for (int i = 0; i < static_cast<int>(traj.waypoints.size()); ++i) {
                const WrenchTarget w = movement_wrench(traj, i, inertial);
                if (w.w.norm() > worst_norm + 1e-15) {
                    worst_norm = w.w.norm();
                    worst = i;
                }
            }
            const WrenchTarget w = movement_wrench(traj, worst, inertial);
            const Pose& pose = traj.waypoints[static_cast<std::size_t>(worst)];
            const PointCloud world_cloud = cloud.transformed(pose);
            const Vec3 world_com = pose.apply(inertial.center_of_mass);
            PushContact near_miss;
            auto push = optimize_push_contact(world_cloud, world_com, w, config.mu,
                                              config.push_samples, &near_miss);
            if (!push) {
                result.failed_part = part_id;
                return result;
            }
            assignment.is_grasp = false;
            assignment.push = *push;
        }
        result.assignments.push_back(assignment);
        assembled.push_back({&mesh, target_poses[static_cast<std::size_t>(part_id)]});
    }
    result.success = true;
    return result;
}

nlohmann::json contact_to_json(const ContactAssignment& c) {
    if (c.is_grasp) {
        return nlohmann::json{
            {"part_id", c.part_id},
            {"grasp",
             {{"a", {c.grasp.point_a.x(), c.grasp.point_a.y(), c.grasp.point_a.z()}},
              {"b", {c.grasp.point_b.x(), c.grasp.point_b.y(), c.grasp.point_b.z()}},
              {"quality", c.grasp.quality}}}};
    }
    return nlohmann::json{
        {"part_id", c.part_id},
        {"push",
         {{"c", {c.push.point.x(), c.push.point.y(), c.push.point.z()}},
          {"F", {c.push.force.x(), c.push.force.y(), c.push.force.z()}},
          {"residual", c.push.residual}}}};
}

ContactAssignment contact_from_json(const nlohmann::json& j) {
    ContactAssignment c;
    c.part_id = j.at("part_id").get<int>();
    if (j.contains("grasp")) {
        c.is_grasp = true;
        const auto& g = j.at("grasp");
        for (int i = 0; i < 3; ++i) {
            c.grasp.point_a[i] = g.at("a")[static_cast<std::size_t>(i)].get<double>();
            c.grasp.point_b[i] = g.at("b")[static_cast<std::size_t>(i)].get<double>();
        }
        c.grasp.quality = g.at("quality").get<double>();
    } else {
        c.is_grasp = false;
        const auto& p = j.at("push");
        for (int i = 0; i < 3; ++i) {
            c.push.point[i] = p.at("c")[static_cast<std::size_t>(i)].get<double>();
            c.push.force[i] = p.at("F")[static_cast<std::size_t>(i)].get<double>();
        }
        c.push.residual = p.at("residual").get<double>();
    }
    return c;
}

} // namespace asp::contact
