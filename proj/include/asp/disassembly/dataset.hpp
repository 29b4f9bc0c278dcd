#pragma once

#include <nlohmann/json_fwd.hpp>

#include "asp/disassembly/enumerate.hpp"

namespace asp::disassembly {

struct DatasetConfig {
    int n_t = 256;               // target cloud points
    int n_r = 128;               // per-part cloud points
    int splits_per_sequence = 3; // random segment splits sampled per sequence
    std::uint64_t seed = 0;
};

// One remaining (unassembled) part inside a training sample.
struct PartEntry {
    int part_id = -1;
    int feasible = 0; // y_i
    Pose target_pose;
    geom::PointCloud cloud; // canonical orientation (identity pose)
};

// One D4PAS-style record: blueprint rendered at target poses, the set of
// already assembled parts, and per-remaining-part feasibility labels.
struct SequenceSample {
    int blueprint_id = -1;
    int total_parts = 0;
    std::vector<int> assembled_ids;
    geom::PointCloud target_cloud;
    std::vector<PartEntry> parts;
};

// Feasible next parts per assembled-set mask, folded over all sequences.
std::map<std::uint64_t, std::set<int>> prefix_feasibility(
    const std::vector<AssemblySequence>& sequences);

// Emits one sample per sampled split of each sequence. Labels: y_i = 1 iff
// some sequence extends the sample's exact assembled set with part i next.
std::vector<SequenceSample> emit_dataset(int blueprint_id, const BlueprintContext& ctx,
                                         const std::vector<AssemblySequence>& sequences,
                                         const DatasetConfig& config);

nlohmann::json sample_to_json(const SequenceSample& sample);
SequenceSample sample_from_json(const nlohmann::json& j);

nlohmann::json sequence_to_json(const AssemblySequence& seq);
AssemblySequence sequence_from_json(const nlohmann::json& j);

} // namespace asp::disassembly
