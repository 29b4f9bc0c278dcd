#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "asp/disassembly/actions.hpp"
#include "asp/geom/point_cloud.hpp"
#include "asp/geom/queries.hpp"

namespace asp::disassembly {

using geom::Pose;
using geom::PosedMesh;
using geom::TriMesh;

// Shared per-blueprint context for removal sweeps: geometry, inertial data
// and the escape distance (twice the assembled bounding-sphere diameter).
struct BlueprintContext {
    std::vector<const TriMesh*> meshes;
    std::vector<Pose> target_poses;
    std::vector<InertialProps> props;
    double escape_distance = 0.0;
    double clearance = geom::kPlanningClearance;
    double friction = 0.2;
    std::uint64_t seed = 0;

    static BlueprintContext make(const std::vector<const TriMesh*>& meshes,
                                 const std::vector<Pose>& target_poses, double density = 1000.0);
    int part_count() const { return static_cast<int>(meshes.size()); }
};

// Search state: poses of all parts plus the removed set. Non-removed parts
// sit at their target poses; removed parts are parked at their escape poses.
struct AssemblyState {
    std::vector<Pose> poses;
    std::vector<bool> removed;
    const AssemblyState* parent = nullptr;
    std::optional<DisassemblyAction> action;

    std::uint64_t removed_mask() const;
    static AssemblyState root(const BlueprintContext& ctx);
};

struct AssemblySequence {
    std::vector<int> order;                        // assembly order m_1..m_M
    std::vector<DisassemblyAction> removal_actions; // aligned with order
};

// Pose path of a removal sweep (lambda in [0, 1]); translations are straight
// lines, rotations a full-turn screw about the COM axis plus axial escape.
std::function<Pose(double)> removal_path(const BlueprintContext& ctx, int part_id,
                                         const Pose& start, const DisassemblyAction& action);
int removal_path_steps(const BlueprintContext& ctx, int part_id, const DisassemblyAction& action,
                       double resolution_scale = 1.0);

// Sweeps the part along the action direction to the escape distance; child
// state on success (part marked removed, parked at the swept-out pose).
std::optional<AssemblyState> attempt_removal(const AssemblyState& state,
                                             const DisassemblyAction& action,
                                             const BlueprintContext& ctx);

// Removed-set novelty: true (and records the mask) iff unseen.
bool is_novel(const AssemblyState& state, std::set<std::uint64_t>& visited);

// Robot-executability gate: the part at its pre-removal pose needs either an
// antipodal grasp pair clear of the other parts or a pushable surface point
// whose inward normal is within 45 degrees of the removal direction.
bool is_executable(const AssemblyState& before, const DisassemblyAction& action,
                   const BlueprintContext& ctx);

struct EnumerationLimits {
    int max_states = 50000;
    int max_sequences = 10000;
    double time_budget_s = 60.0;
    int jobs = 1;
};

struct SearchStats {
    int states_expanded = 0;
    int removal_attempts = 0;
    int sequences_found = 0;
    double elapsed_s = 0.0;
    bool truncated = false;
};

struct EnumerationResult {
    std::vector<AssemblySequence> sequences;
    SearchStats stats;
    // feasible next parts per removed-set mask (disassembly direction)
    std::map<std::uint64_t, std::vector<std::pair<int, DisassemblyAction>>> edges;

    bool failed() const { return sequences.empty(); }
};

// BFS over removed-set states (Algorithm-1 style, reversed into assembly
// sequences). Throws InvalidInputError when the root blueprint self-collides.
EnumerationResult enumerate_sequences(const BlueprintContext& ctx,
                                      const EnumerationLimits& limits = {});

// Replays a sequence forward (assembling each part backwards along its
// removal path). resolution_scale multiplies the sweep sample count; 2.0
// checks at half the original sweep spacing.
bool replay_sequence(const BlueprintContext& ctx, const AssemblySequence& seq,
                     double resolution_scale = 2.0);

} // namespace asp::disassembly
