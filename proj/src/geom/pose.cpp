#include "asp/geom/pose.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "asp/core/error.hpp"

namespace asp::geom {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kUnitQuatTol = 1e-9;
} // namespace

Pose::Pose(const Vec3& translation, const Quat& rotation) : t(translation), q(rotation) {
    const double n = q.norm();
    if (std::abs(n - 1.0) > 1e-6) {
        throw InvalidInputError("Pose rotation is not a unit quaternion");
    }
    if (std::abs(n - 1.0) > kUnitQuatTol) q.normalize();
}

Pose Pose::from_axis_angle(const Vec3& translation, const Vec3& axis_angle) {
    Pose p;
    p.t = translation;
    p.q = axis_angle_to_quat(axis_angle);
    return p;
}

Pose Pose::compose(const Pose& other) const {
    Pose out;
    out.q = (q * other.q).normalized();
    out.t = q * other.t + t;
    return out;
}

Pose Pose::inverse() const {
    Pose out;
    out.q = q.conjugate();
    out.t = -(out.q * t);
    return out;
}

Vec3 Pose::axis_angle() const { return quat_to_axis_angle(q); }

double Pose::rotation_angle_to(const Pose& other) const {
    const Quat rel = q.conjugate() * other.q;
    return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

bool Pose::approx_equal(const Pose& other, double tol) const {
    return (t - other.t).norm() <= tol && rotation_angle_to(other) <= tol;
}

Pose interpolate(const Pose& a, const Pose& b, double s) {
    Pose out;
    out.t = (1.0 - s) * a.t + s * b.t;
    Quat qb = b.q;
    if (a.q.dot(qb) < 0.0) qb.coeffs() = -qb.coeffs();
    out.q = a.q.slerp(s, qb).normalized();
    return out;
}

Vec3 quat_to_axis_angle(const Quat& q_in) {
    Quat q = q_in;
    if (q.w() < 0.0) q.coeffs() = -q.coeffs(); // canonical hemisphere, angle in [0, pi]
    const double sin_half = q.vec().norm();
    const double angle = 2.0 * std::atan2(sin_half, q.w());
    if (sin_half < 1e-15) return Vec3::Zero();
    Vec3 axis = q.vec() / sin_half;
    if (angle > kPi - 1e-12) {
        // Angle == pi: both axis signs represent the same rotation; pick the
        // one whose first nonzero component is positive.
        for (int i = 0; i < 3; ++i) {
            if (std::abs(axis[i]) > 1e-12) {
                if (axis[i] < 0.0) axis = -axis;
                break;
            }
        }
    }
    return axis * angle;
}

Quat axis_angle_to_quat(const Vec3& aa) {
    const double angle = aa.norm();
    if (angle < 1e-15) return Quat::Identity();
    return Quat(Eigen::AngleAxisd(angle, aa / angle));
}

nlohmann::json pose_to_json(const Pose& p) {
    const Vec3 aa = p.axis_angle();
    return nlohmann::json{{"t", {p.t.x(), p.t.y(), p.t.z()}}, {"aa", {aa.x(), aa.y(), aa.z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
    if (!j.contains("t") || !j.contains("aa")) {
        throw InvalidInputError("pose JSON must contain \"t\" and \"aa\"");
    }
    const auto& t = j.at("t");
    const auto& aa = j.at("aa");
    if (t.size() != 3 || aa.size() != 3) {
        throw InvalidInputError("pose JSON vectors must have length 3");
    }
    return Pose::from_axis_angle(Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>()),
                                 Vec3(aa[0].get<double>(), aa[1].get<double>(), aa[2].get<double>()));
}

} // namespace asp::geom
