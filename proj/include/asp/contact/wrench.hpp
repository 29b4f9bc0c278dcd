#pragma once

#include <Eigen/Dense>

#include "asp/geom/inertia.hpp"
#include "asp/motion/trajectory.hpp"

namespace asp::contact {

using geom::Mat3;
using geom::Vec3;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using GraspMapMatrix = Eigen::Matrix<double, 6, 3>;

// Target wrench: force (N) and torque (N*m) about the part COM, world frame.
struct WrenchTarget {
    Vec6 w = Vec6::Zero();

    Vec3 force() const { return w.head<3>(); }
    Vec3 torque() const { return w.tail<3>(); }
};

// Deterministic tangent frame for a unit normal: Gram-Schmidt against the
// world axis least aligned with it.
void tangent_basis(const Vec3& normal, Vec3* t1, Vec3* t2);

// Maps a contact-frame force (tangent1, tangent2, inward normal) to the world
// wrench about `com`: top rows force, bottom rows (c - com) x column.
GraspMapMatrix grasp_map(const Vec3& c, const Vec3& inward_normal, const Vec3& com);

// Quasi-static movement wrench at a trajectory step: gravity compensation
// plus m*a from second differences over waypoints (unit time per step) and
// inertia-weighted angular acceleration about the COM.
WrenchTarget movement_wrench(const motion::Trajectory& traj, int step_index,
                             const geom::InertialProps& props);

constexpr double kGravity = 9.81; // m/s^2

} // namespace asp::contact
