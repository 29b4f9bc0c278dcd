#pragma once

#include <nlohmann/json_fwd.hpp>
#include <variant>
#include <vector>

#include "asp/contact/push.hpp"
#include "asp/motion/plan_all.hpp"

namespace asp::contact {

struct ContactConfig {
    double mu = kDefaultFriction;
    double antipodal_tol_deg = kDefaultAntipodalTolDeg;
    double gripper_radius = 0.005; // m; grasp points modeled as spheres
    double clearance = geom::kPlanningClearance;
    int cloud_points = 256;
    int push_samples = 48;
    std::uint64_t seed = 0;
};

// Per-step assignment: either a two-point grasp or a single pushing contact.
struct ContactAssignment {
    int part_id = -1;
    bool is_grasp = false;
    GraspPair grasp;   // world frame at the target pose
    PushContact push;  // world frame at the worst-case waypoint
};

struct ContactPlanResult {
    bool success = false;
    int failed_part = -1;
    std::vector<ContactAssignment> assignments;
};

// For each moving part, the highest-quality grasp pair whose contact spheres
// stay clear of the already assembled parts at every trajectory waypoint;
// falls back to push optimization against the worst-case movement wrench.
ContactPlanResult plan_contacts(const std::vector<int>& order,
                                const std::vector<motion::Trajectory>& trajectories,
                                const std::vector<const geom::TriMesh*>& meshes,
                                const std::vector<geom::Pose>& target_poses,
                                const std::vector<geom::InertialProps>& props,
                                const ContactConfig& config);

nlohmann::json contact_to_json(const ContactAssignment& c);
ContactAssignment contact_from_json(const nlohmann::json& j);

} // namespace asp::contact
