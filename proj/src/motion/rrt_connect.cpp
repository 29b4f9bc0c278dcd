#include "asp/motion/rrt_connect.hpp"

#include <algorithm>
#include <cmath>

#include "asp/core/error.hpp"
#include "asp/core/rng.hpp"

namespace asp::motion {

namespace {

using geom::Aabb;
using geom::Quat;

struct Node {
    Pose pose;
    int parent = -1;
};

Quat random_quaternion(Rng& rng) {
    // Shoemake's uniform quaternion sampling.
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double u3 = rng.uniform();
    const double two_pi = 6.283185307179586476925286766559;
    const double a = std::sqrt(1.0 - u1);
    const double b = std::sqrt(u1);
    return Quat(a * std::sin(two_pi * u2), a * std::cos(two_pi * u2), b * std::sin(two_pi * u3),
                b * std::cos(two_pi * u3));
}

int nearest(const std::vector<Node>& tree, const Pose& target, double rot_weight) {
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const double d = se3_distance(tree[i].pose, target, rot_weight);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

bool segment_free(const TriMesh& part, const Pose& a, const Pose& b,
                  std::span<const PosedMesh> obstacles, double clearance, double resolution,
                  double rot_weight) {
    const double d = se3_distance(a, b, rot_weight);
    const int n = std::max(1, static_cast<int>(std::ceil(d / resolution)));
    for (int k = 1; k <= n; ++k) {
        const Pose p = geom::interpolate(a, b, static_cast<double>(k) / n);
        if (geom::in_collision_with_any(part, p, obstacles, clearance)) return false;
    }
    return true;
}

enum class Extend { Trapped, Advanced, Reached };

Extend extend_tree(std::vector<Node>& tree, const Pose& target, const TriMesh& part,
                   std::span<const PosedMesh> obstacles, double clearance, double step_size,
                   double resolution, double rot_weight, int* new_index) {
    const int near = nearest(tree, target, rot_weight);
    const Pose& from = tree[static_cast<std::size_t>(near)].pose;
    const double d = se3_distance(from, target, rot_weight);
    if (d < 1e-12) return Extend::Reached;
    const bool reaches = d <= step_size;
    const Pose to = reaches ? target : geom::interpolate(from, target, step_size / d);
    if (!segment_free(part, from, to, obstacles, clearance, resolution, rot_weight)) {
        return Extend::Trapped;
    }
    tree.push_back({to, near});
    *new_index = static_cast<int>(tree.size()) - 1;
    return reaches ? Extend::Reached : Extend::Advanced;
}

std::vector<Pose> path_to_root(const std::vector<Node>& tree, int leaf) {
    std::vector<Pose> path;
    for (int i = leaf; i >= 0; i = tree[static_cast<std::size_t>(i)].parent) {
        path.push_back(tree[static_cast<std::size_t>(i)].pose);
    }
    return path;
}

} // namespace

void smooth_trajectory(const TriMesh& part, Trajectory& traj,
                       std::span<const PosedMesh> obstacles, double clearance, double rot_weight,
                       int rounds, std::uint64_t seed) {
    Rng rng(seed);
    const double resolution = traj.step_resolution > 0.0 ? traj.step_resolution : 1e-3;
    for (int round = 0; round < rounds; ++round) {
        const std::size_t n = traj.waypoints.size();
        if (n < 3) return;
        std::size_t i = rng.uniform_index(n - 2);
        std::size_t j = i + 2 + rng.uniform_index(n - i - 2);
        if (j >= n) continue;
        if (segment_free(part, traj.waypoints[i], traj.waypoints[j], obstacles, clearance,
                         resolution, rot_weight)) {
            traj.waypoints.erase(traj.waypoints.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                 traj.waypoints.begin() + static_cast<std::ptrdiff_t>(j));
        }
    }
}

std::optional<Trajectory> plan_part_motion(const TriMesh& part, const Pose& start,
                                           const Pose& goal,
                                           std::span<const PosedMesh> obstacles,
                                           const RrtConfig& config, RrtStats* stats) {
    const double rot_weight = part.bounding_radius();
    const double step_size =
        config.step_size > 0.0 ? config.step_size : std::max(0.5 * part.bounding_radius(), 1e-3);
    // Planner segments are validated at half the declared trajectory
    // resolution so a half-resolution replay revisits exactly the checked
    // samples.
    const double declared_resolution = std::max(step_size / 2.0, 1e-6);
    const double check_resolution = declared_resolution / 2.0;

    if (geom::in_collision_with_any(part, start, obstacles, config.clearance)) {
        throw InvalidInputError("motion planning start pose is in collision");
    }
    if (geom::in_collision_with_any(part, goal, obstacles, config.clearance)) {
        throw InvalidInputError("motion planning goal pose is in collision");
    }

    RrtStats local;
    auto finish = [&](std::vector<Pose> waypoints) -> std::optional<Trajectory> {
        Trajectory traj;
        traj.waypoints = std::move(waypoints);
        traj.step_resolution = declared_resolution;
        smooth_trajectory(part, traj, obstacles, config.clearance, rot_weight,
                          config.smoothing_rounds, config.seed ^ 0x51C0DEULL);
        local.connected = true;
        if (stats) *stats = local;
        return traj;
    };

    // Trivial connect first.
    if (segment_free(part, start, goal, obstacles, config.clearance, check_resolution,
                     rot_weight)) {
        local.iterations = 1;
        return finish({start, goal});
    }

    // Sampling bounds: start/goal/obstacle extents inflated by the part size.
    Aabb bounds;
    bounds.expand(part.bounds().transformed(start));
    bounds.expand(part.bounds().transformed(goal));
    for (const auto& obs : obstacles) bounds.expand(obs.mesh->bounds().transformed(obs.pose));
    const double inflate = 4.0 * part.bounding_radius();
    bounds.lo -= geom::Vec3::Constant(inflate);
    bounds.hi += geom::Vec3::Constant(inflate);

    Rng rng(config.seed);
    std::vector<Node> tree_a{{start, -1}};
    std::vector<Node> tree_b{{goal, -1}};
    bool a_is_start = true;

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        local.iterations = iter;
        Pose sample;
        if (rng.uniform() < config.goal_bias_connect) {
            sample = tree_b.back().pose; // aim at the other tree's newest pose
        } else {
            sample.t = geom::Vec3(rng.uniform(bounds.lo.x(), bounds.hi.x()),
                                  rng.uniform(bounds.lo.y(), bounds.hi.y()),
                                  rng.uniform(bounds.lo.z(), bounds.hi.z()));
            sample.q = random_quaternion(rng);
        }

        int new_a = -1;
        const Extend res = extend_tree(tree_a, sample, part, obstacles, config.clearance,
                                       step_size, check_resolution, rot_weight, &new_a);
        if (res != Extend::Trapped && new_a >= 0) {
            const Pose& target = tree_a[static_cast<std::size_t>(new_a)].pose;
            int new_b = -1;
            Extend con = Extend::Advanced;
            while (con == Extend::Advanced) {
                con = extend_tree(tree_b, target, part, obstacles, config.clearance, step_size,
                                  check_resolution, rot_weight, &new_b);
            }
            if (con == Extend::Reached) {
                std::vector<Pose> from_a = path_to_root(tree_a, new_a);
                std::reverse(from_a.begin(), from_a.end());
                std::vector<Pose> from_b =
                    path_to_root(tree_b, new_b >= 0 ? new_b
                                                    : nearest(tree_b, target, rot_weight));
                if (!a_is_start) {
                    std::swap(from_a, from_b);
                    std::reverse(from_a.begin(), from_a.end());
                    std::reverse(from_b.begin(), from_b.end());
                }
                std::vector<Pose> waypoints = std::move(from_a);
                waypoints.insert(waypoints.end(), from_b.begin(), from_b.end());
                // Drop exact duplicates at the junction.
                std::vector<Pose> cleaned;
                for (const auto& p : waypoints) {
                    if (cleaned.empty() || se3_distance(cleaned.back(), p, rot_weight) > 1e-12) {
                        cleaned.push_back(p);
                    }
                }
                return finish(std::move(cleaned));
            }
        }
        std::swap(tree_a, tree_b);
        a_is_start = !a_is_start;
    }
    if (stats) *stats = local;
    return std::nullopt;
}

} // namespace asp::motion
