#include "asp/contact/wrench.hpp"

#include <algorithm>
#include <cmath>

#include "asp/core/error.hpp"

namespace asp::contact {

void tangent_basis(const Vec3& normal, Vec3* t1, Vec3* t2) {
    int smallest = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(normal[i]) < std::abs(normal[smallest])) smallest = i;
    }
    const Vec3 seed = Vec3::Unit(smallest);
    *t1 = (seed - seed.dot(normal) * normal).normalized();
    *t2 = normal.cross(*t1);
}

GraspMapMatrix grasp_map(const Vec3& c, const Vec3& inward_normal, const Vec3& com) {
    if (std::abs(inward_normal.norm() - 1.0) > 1e-6) {
        throw InvalidInputError("grasp_map requires a unit normal");
    }
    Vec3 t1, t2;
    tangent_basis(inward_normal, &t1, &t2);
    GraspMapMatrix g;
    const Vec3 lever = c - com;
    const Vec3 cols[3] = {t1, t2, inward_normal};
    for (int j = 0; j < 3; ++j) {
        g.block<3, 1>(0, j) = cols[j];
        g.block<3, 1>(3, j) = lever.cross(cols[j]);
    }
    return g;
}

WrenchTarget movement_wrench(const motion::Trajectory& traj, int step_index,
                             const geom::InertialProps& props) {
    const auto& wp = traj.waypoints;
    const int n = static_cast<int>(wp.size());
    if (step_index < 0 || step_index >= n) {
        throw InvalidInputError("movement_wrench step index out of range");
    }

    WrenchTarget target;
    target.w.head<3>() = Vec3(0.0, 0.0, props.mass * kGravity); // hold against gravity

    if (n < 3) return target;
    const int i = std::clamp(step_index, 1, n - 2);

    // Linear acceleration: central second difference, unit time per step.
    const Vec3 accel = wp[static_cast<std::size_t>(i + 1)].t -
                       2.0 * wp[static_cast<std::size_t>(i)].t +
                       wp[static_cast<std::size_t>(i - 1)].t;
    target.w.head<3>() += props.mass * accel;

    // Angular acceleration from half-step angular velocities.
    const auto rotvec = [](const geom::Quat& from, const geom::Quat& to) {
        return geom::quat_to_axis_angle(to * from.conjugate());
    };
    const Vec3 w_fwd = rotvec(wp[static_cast<std::size_t>(i)].q,
                              wp[static_cast<std::size_t>(i + 1)].q);
    const Vec3 w_bwd = rotvec(wp[static_cast<std::size_t>(i - 1)].q,
                              wp[static_cast<std::size_t>(i)].q);
    const Vec3 alpha = w_fwd - w_bwd;
    const Mat3 r = wp[static_cast<std::size_t>(i)].q.toRotationMatrix();
    const Mat3 inertia_world = r * props.inertia_com * r.transpose();
    target.w.tail<3>() = inertia_world * alpha;
    return target;
}

} // namespace asp::contact
