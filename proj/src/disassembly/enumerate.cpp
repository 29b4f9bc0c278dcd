#include "asp/disassembly/enumerate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "asp/contact/grasp.hpp"
#include "asp/core/error.hpp"
#include "asp/core/parallel.hpp"

namespace asp::disassembly {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPushAlignCosine = 0.7071067811865476; // cos 45 deg
constexpr int kExecCloudPoints = 128;

double assembly_bounding_diameter(const std::vector<const TriMesh*>& meshes,
                                  const std::vector<Pose>& poses) {
    geom::Aabb box;
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        box.expand(meshes[i]->bounds().transformed(poses[i]));
    }
    return box.valid() ? box.extent().norm() : 0.0;
}

std::vector<PosedMesh> gather_obstacles(const AssemblyState& state, const BlueprintContext& ctx,
                                        int moving_part) {
    std::vector<PosedMesh> obstacles;
    for (int i = 0; i < ctx.part_count(); ++i) {
        if (i == moving_part || state.removed[static_cast<std::size_t>(i)]) continue;
        obstacles.push_back({ctx.meshes[static_cast<std::size_t>(i)],
                             state.poses[static_cast<std::size_t>(i)]});
    }
    return obstacles;
}

} // namespace

BlueprintContext BlueprintContext::make(const std::vector<const TriMesh*>& meshes,
                                        const std::vector<Pose>& target_poses, double density) {
    if (meshes.size() != target_poses.size() || meshes.empty()) {
        throw InvalidInputError("blueprint needs matching mesh and pose lists");
    }
    BlueprintContext ctx;
    ctx.meshes = meshes;
    ctx.target_poses = target_poses;
    ctx.props.reserve(meshes.size());
    for (const auto* m : meshes) ctx.props.push_back(geom::compute_inertial_props(*m, density));
    ctx.escape_distance = 2.0 * assembly_bounding_diameter(meshes, target_poses);
    return ctx;
}

std::uint64_t AssemblyState::removed_mask() const {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < removed.size(); ++i) {
        if (removed[i]) mask |= (1ULL << i);
    }
    return mask;
}

AssemblyState AssemblyState::root(const BlueprintContext& ctx) {
    AssemblyState s;
    s.poses = ctx.target_poses;
    s.removed.assign(static_cast<std::size_t>(ctx.part_count()), false);
    return s;
}

std::function<Pose(double)> removal_path(const BlueprintContext& ctx, int part_id,
                                         const Pose& start, const DisassemblyAction& action) {
    const ActionDirection dir =
        action_direction(ctx.props[static_cast<std::size_t>(part_id)], action.direction_index);
    const double d = action.magnitude;
    if (!dir.is_rotation) {
        return [start, dir, d](double s) {
            Pose p = start;
            p.t += s * d * dir.axis;
            return p;
        };
    }
    // Full-turn screw about the COM axis plus axial escape translation.
    const geom::Vec3 com_world =
        start.apply(ctx.props[static_cast<std::size_t>(part_id)].center_of_mass);
    return [start, dir, d, com_world](double s) {
        const geom::Quat spin(Eigen::AngleAxisd(kTwoPi * s, dir.axis));
        Pose p;
        p.q = (spin * start.q).normalized();
        p.t = com_world + spin * (start.t - com_world) + s * d * dir.axis;
        return p;
    };
}

int removal_path_steps(const BlueprintContext& ctx, int part_id, const DisassemblyAction& action,
                       double resolution_scale) {
    const TriMesh& mesh = *ctx.meshes[static_cast<std::size_t>(part_id)];
    const ActionDirection dir =
        action_direction(ctx.props[static_cast<std::size_t>(part_id)], action.direction_index);
    double path_length = action.magnitude;
    if (dir.is_rotation) path_length += kTwoPi * mesh.bounding_radius();
    const double step = geom::default_sweep_step(mesh, path_length);
    const int base = std::max(1, static_cast<int>(std::ceil(1.0 / step)));
    return std::max(1, static_cast<int>(std::ceil(base * resolution_scale)));
}

std::optional<AssemblyState> attempt_removal(const AssemblyState& state,
                                             const DisassemblyAction& action,
                                             const BlueprintContext& ctx) {
    const int part = action.part_id;
    if (state.removed[static_cast<std::size_t>(part)]) {
        throw InvalidInputError("attempt_removal: part already removed");
    }
    const TriMesh& mesh = *ctx.meshes[static_cast<std::size_t>(part)];
    const Pose& start = state.poses[static_cast<std::size_t>(part)];
    const auto path = removal_path(ctx, part, start, action);
    const int steps = removal_path_steps(ctx, part, action);
    const std::vector<PosedMesh> obstacles = gather_obstacles(state, ctx, part);
    const double fraction =
        geom::sweep_path_free_fraction(mesh, path, steps, obstacles, ctx.clearance);
    if (fraction < 1.0) return std::nullopt;

    AssemblyState child;
    child.poses = state.poses;
    child.removed = state.removed;
    child.poses[static_cast<std::size_t>(part)] = path(1.0);
    child.removed[static_cast<std::size_t>(part)] = true;
    child.parent = &state;
    child.action = action;
    return child;
}

bool is_novel(const AssemblyState& state, std::set<std::uint64_t>& visited) {
    return visited.insert(state.removed_mask()).second;
}

bool is_executable(const AssemblyState& before, const DisassemblyAction& action,
                   const BlueprintContext& ctx) {
    const int part = action.part_id;
    const TriMesh& mesh = *ctx.meshes[static_cast<std::size_t>(part)];
    const Pose& pose = before.poses[static_cast<std::size_t>(part)];
    const ActionDirection dir =
        action_direction(ctx.props[static_cast<std::size_t>(part)], action.direction_index);
    const std::vector<PosedMesh> others = gather_obstacles(before, ctx, part);

    const geom::PointCloud cloud = geom::sample_point_cloud(
        mesh, pose, kExecCloudPoints, ctx.seed ^ (0xC0FFEEULL + static_cast<std::uint64_t>(part)));

    const auto point_clear = [&](const geom::Vec3& p) {
        for (const auto& obs : others) {
            if (geom::point_mesh_distance(p, *obs.mesh, obs.pose) < ctx.clearance) return false;
        }
        return true;
    };

    // Push proxy: a surface point whose inward normal roughly matches the
    // removal direction and that the gripper can reach.
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const geom::Vec3 inward = -cloud.normals.row(i).transpose();
        if (inward.dot(dir.axis) < kPushAlignCosine) continue;
        if (point_clear(cloud.points.row(i))) return true;
    }

    // Grasp: any antipodal pair with both contacts reachable.
    const auto pairs = contact::antipodal_pairs(cloud, ctx.friction,
                                                contact::kDefaultAntipodalTolDeg);
    for (const auto& pair : pairs) {
        if (point_clear(pair.point_a) && point_clear(pair.point_b)) return true;
    }
    return false;
}

EnumerationResult enumerate_sequences(const BlueprintContext& ctx,
                                      const EnumerationLimits& limits) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    const int m = ctx.part_count();
    // Root must be interpenetration-free.
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (geom::check_collision(*ctx.meshes[static_cast<std::size_t>(i)],
                                      ctx.target_poses[static_cast<std::size_t>(i)],
                                      *ctx.meshes[static_cast<std::size_t>(j)],
                                      ctx.target_poses[static_cast<std::size_t>(j)],
                                      geom::kContactClearance)) {
                throw InvalidInputError("blueprint root state is in collision");
            }
        }
    }

    EnumerationResult result;
    // States are reconstructed from masks: every non-removed part sits at its
    // target pose, so the mask alone determines all obstacle poses.
    const auto state_from_mask = [&](std::uint64_t mask) {
        AssemblyState s = AssemblyState::root(ctx);
        for (int i = 0; i < m; ++i) {
            if (mask & (1ULL << i)) s.removed[static_cast<std::size_t>(i)] = true;
        }
        return s;
    };

    std::set<std::uint64_t> visited;
    std::vector<std::uint64_t> layer{0};
    visited.insert(0);

    struct Expansion {
        std::vector<std::pair<int, DisassemblyAction>> edges;
        int attempts = 0;
    };

    bool out_of_budget = false;
    while (!layer.empty() && !out_of_budget) {
        std::vector<Expansion> expansions(layer.size());
        parallel_for(layer.size(), limits.jobs, [&](std::size_t li) {
            const AssemblyState state = state_from_mask(layer[li]);
            Expansion& ex = expansions[li];
            for (int part = 0; part < m; ++part) {
                if (state.removed[static_cast<std::size_t>(part)]) continue;
                for (int j = 1; j <= kDirectionCount; ++j) {
                    DisassemblyAction action{part, j, ctx.escape_distance};
                    ++ex.attempts;
                    const auto child = attempt_removal(state, action, ctx);
                    if (!child) continue;
                    if (!is_executable(state, action, ctx)) continue;
                    ex.edges.emplace_back(part, action);
                    break; // one witness direction per (state, part)
                }
            }
        });

        std::vector<std::uint64_t> next;
        for (std::size_t li = 0; li < layer.size(); ++li) {
            result.stats.states_expanded += 1;
            result.stats.removal_attempts += expansions[li].attempts;
            auto& edges = result.edges[layer[li]];
            for (const auto& e : expansions[li].edges) {
                edges.push_back(e);
                const std::uint64_t child_mask = layer[li] | (1ULL << e.first);
                if (visited.insert(child_mask).second) next.push_back(child_mask);
            }
        }
        std::sort(next.begin(), next.end());
        layer = std::move(next);

        if (result.stats.states_expanded >= limits.max_states || elapsed() > limits.time_budget_s) {
            result.stats.truncated = true;
            out_of_budget = true;
        }
    }

    // Extract every removal-order path through the edge DAG (ascending part
    // id at each branch), reversed into assembly sequences.
    const std::uint64_t full = m >= 64 ? ~0ULL : ((1ULL << m) - 1);
    std::vector<std::pair<int, DisassemblyAction>> stack;
    const std::function<void(std::uint64_t)> dfs = [&](std::uint64_t mask) {
        if (static_cast<int>(result.sequences.size()) >= limits.max_sequences) {
            result.stats.truncated = true;
            return;
        }
        if (mask == full) {
            AssemblySequence seq;
            seq.order.reserve(stack.size());
            seq.removal_actions.reserve(stack.size());
            for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                seq.order.push_back(it->first);
                seq.removal_actions.push_back(it->second);
            }
            result.sequences.push_back(std::move(seq));
            return;
        }
        const auto it = result.edges.find(mask);
        if (it == result.edges.end()) return;
        for (const auto& e : it->second) {
            stack.push_back(e);
            dfs(mask | (1ULL << e.first));
            stack.pop_back();
        }
    };
    dfs(0);

    result.stats.sequences_found = static_cast<int>(result.sequences.size());
    result.stats.elapsed_s = elapsed();
    return result;
}

bool replay_sequence(const BlueprintContext& ctx, const AssemblySequence& seq,
                     double resolution_scale) {
    const int m = ctx.part_count();
    if (static_cast<int>(seq.order.size()) != m) return false;

    std::vector<PosedMesh> assembled;
    for (int k = 0; k < m; ++k) {
        const int part = seq.order[static_cast<std::size_t>(k)];
        const DisassemblyAction& action = seq.removal_actions[static_cast<std::size_t>(k)];
        const Pose& target = ctx.target_poses[static_cast<std::size_t>(part)];
        const auto path = removal_path(ctx, part, target, action);
        const int steps = removal_path_steps(ctx, part, action, resolution_scale);
        const TriMesh& mesh = *ctx.meshes[static_cast<std::size_t>(part)];
        // Insertion traverses the removal path backwards; the sampled pose
        // set is identical either way.
        const double fraction =
            geom::sweep_path_free_fraction(mesh, path, steps, assembled, ctx.clearance);
        if (fraction < 1.0) return false;
        assembled.push_back({&mesh, target});
    }
    return true;
}

} // namespace asp::disassembly
