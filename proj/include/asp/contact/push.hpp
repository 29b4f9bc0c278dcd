#pragma once

#include <optional>

#include "asp/contact/grasp.hpp"

namespace asp::contact {

// Pushing contact: point, contact-frame force (t1, t2, inward normal) and the
// wrench residual it leaves.
struct PushContact {
    Vec3 point = Vec3::Zero();
    Vec3 force = Vec3::Zero(); // contact frame
    double residual = 0.0;
    int point_index = -1;
};

struct PushSolveOptions {
    double regularization = 1e-6;
    int max_iters = 500;
    double grad_tol = 1e-9;
};

inline double push_residual_tolerance(const WrenchTarget& w) {
    return 1e-6 * w.w.norm() + 1e-9;
}

// Projects onto the second-order friction cone ||(x1,x2)|| <= mu * x3.
Vec3 project_friction_cone(const Vec3& f, double mu);

// Minimizes ||G(c) F - W||^2 + eps ||F||^2 over the friction cone by
// projected gradient. Accepts iff the residual is within the tolerance gate;
// otherwise returns nullopt and reports the best residual reached.
std::optional<PushContact> solve_push_force(const Vec3& c, const Vec3& inward_normal,
                                            const Vec3& com, const WrenchTarget& w, double mu,
                                            const PushSolveOptions& opts = {},
                                            double* best_residual = nullptr);

// Samples candidate points (farthest-point subsampling), solves each, and
// returns the feasible contact with minimal force norm (ties: lowest sample
// index). Infeasible overall: nullopt with the best residual and its point.
std::optional<PushContact> optimize_push_contact(const PointCloud& cloud, const Vec3& com,
                                                 const WrenchTarget& w, double mu, int n_samples,
                                                 PushContact* best_infeasible = nullptr);

} // namespace asp::contact
