#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <nlohmann/json_fwd.hpp>

namespace asp::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Rigid placement. Rotation is a unit quaternion internally; serialized form
// is translation + axis-angle with the canonical angle in [0, pi].
struct Pose {
    Vec3 t = Vec3::Zero();
    Quat q = Quat::Identity();

    Pose() = default;
    Pose(const Vec3& translation, const Quat& rotation);

    static Pose identity() { return Pose(); }
    static Pose from_axis_angle(const Vec3& translation, const Vec3& axis_angle);

    Vec3 apply(const Vec3& p) const { return q * p + t; }
    Vec3 rotate(const Vec3& v) const { return q * v; }

    // this ∘ other: apply `other` first, then this.
    Pose compose(const Pose& other) const;
    Pose inverse() const;

    // Canonical axis-angle 3-vector (angle in [0, pi]; at exactly pi the axis
    // sign is fixed so its first nonzero component is positive).
    Vec3 axis_angle() const;

    // Geodesic rotation angle to another pose, in [0, pi].
    double rotation_angle_to(const Pose& other) const;

    bool approx_equal(const Pose& other, double tol) const;
};

// Linear translation + shortest-arc slerp, s in [0, 1].
Pose interpolate(const Pose& a, const Pose& b, double s);

Vec3 quat_to_axis_angle(const Quat& q);
Quat axis_angle_to_quat(const Vec3& aa);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

} // namespace asp::geom
