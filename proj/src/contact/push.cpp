#include "asp/contact/push.hpp"

#include <cmath>

#include "asp/core/error.hpp"

namespace asp::contact {

Vec3 project_friction_cone(const Vec3& f, double mu) {
    const double nx = f.head<2>().norm();
    const double z = f.z();
    if (nx <= mu * z) return f;                    // inside
    if (mu * nx <= -z) return Vec3::Zero();        // polar cone: project to apex
    const double z_star = (mu * nx + z) / (mu * mu + 1.0);
    Vec3 out = Vec3::Zero();
    if (nx > 0.0) out.head<2>() = f.head<2>() * (mu * z_star / nx);
    out.z() = z_star;
    return out;
}

std::optional<PushContact> solve_push_force(const Vec3& c, const Vec3& inward_normal,
                                            const Vec3& com, const WrenchTarget& w, double mu,
                                            const PushSolveOptions& opts, double* best_residual) {
    if (mu <= 0.0) throw InvalidInputError("friction coefficient must be positive");
    const GraspMapMatrix g = grasp_map(c, inward_normal, com);
    const Eigen::Matrix3d gtg = g.transpose() * g;
    const Vec3 gtw = g.transpose() * w.w;
    const double lipschitz =
        2.0 * (gtg.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff() + opts.regularization);
    const double step = 1.0 / lipschitz;

    Vec3 f = Vec3::Zero();
    for (int it = 0; it < opts.max_iters; ++it) {
        const Vec3 grad = 2.0 * (gtg * f - gtw) + 2.0 * opts.regularization * f;
        const Vec3 next = project_friction_cone(f - step * grad, mu);
        const double move = (next - f).norm() / step;
        f = next;
        if (move < opts.grad_tol) break;
    }

    const double residual = (g * f - w.w).norm();
    if (best_residual) *best_residual = residual;
    if (residual <= push_residual_tolerance(w)) {
        PushContact out;
        out.point = c;
        out.force = f;
        out.residual = residual;
        return out;
    }
    return std::nullopt;
}

std::optional<PushContact> optimize_push_contact(const PointCloud& cloud, const Vec3& com,
                                                 const WrenchTarget& w, double mu, int n_samples,
                                                 PushContact* best_infeasible) {
    if (n_samples < 1) throw InvalidInputError("optimize_push_contact needs n_samples >= 1");
    const std::vector<int> picks = farthest_point_indices(cloud, n_samples);

    std::optional<PushContact> best;
    PushContact near_miss;
    near_miss.residual = std::numeric_limits<double>::max();
    for (std::size_t s = 0; s < picks.size(); ++s) {
        const int i = picks[s];
        const Vec3 point = cloud.points.row(i);
        const Vec3 inward = -cloud.normals.row(i).transpose();
        double residual = 0.0;
        auto sol = solve_push_force(point, inward, com, w, mu, {}, &residual);
        if (sol) {
            sol->point_index = static_cast<int>(s);
            if (!best || sol->force.norm() < best->force.norm() - 1e-15 ||
                (std::abs(sol->force.norm() - best->force.norm()) <= 1e-15 &&
                 sol->point_index < best->point_index)) {
                best = *sol;
            }
        } else if (residual < near_miss.residual) {
            near_miss.point = point;
            near_miss.residual = residual;
            near_miss.point_index = static_cast<int>(s);
        }
    }
    if (!best && best_infeasible) *best_infeasible = near_miss;
    return best;
}

} // namespace asp::contact
