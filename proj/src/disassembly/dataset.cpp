#include "asp/disassembly/dataset.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "asp/core/error.hpp"
#include "asp/core/rng.hpp"

namespace asp::disassembly {

namespace {

// Micrometer quantization keeps the JSONL compact without affecting geometry.
double quantize(double v) { return std::round(v * 1e6) / 1e6; }

nlohmann::json cloud_to_flat(const geom::PointCloud& cloud) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        for (int c = 0; c < 3; ++c) arr.push_back(quantize(cloud.points(i, c)));
        for (int c = 0; c < 3; ++c) arr.push_back(quantize(cloud.normals(i, c)));
    }
    return arr;
}

geom::PointCloud cloud_from_flat(const nlohmann::json& arr) {
    if (arr.size() % 6 != 0) throw InvalidInputError("cloud array length must be a multiple of 6");
    const Eigen::Index n = static_cast<Eigen::Index>(arr.size() / 6);
    geom::PointCloud cloud;
    cloud.points.resize(n, 3);
    cloud.normals.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            cloud.points(i, c) = arr[static_cast<std::size_t>(6 * i + c)].get<double>();
            cloud.normals(i, c) = arr[static_cast<std::size_t>(6 * i + 3 + c)].get<double>();
        }
    }
    // Re-normalize normals after quantization.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = cloud.normals.row(i).norm();
        if (norm > 1e-12) cloud.normals.row(i) /= norm;
    }
    return cloud;
}

} // namespace

std::map<std::uint64_t, std::set<int>> prefix_feasibility(
    const std::vector<AssemblySequence>& sequences) {
    std::map<std::uint64_t, std::set<int>> feasible;
    for (const auto& seq : sequences) {
        std::uint64_t mask = 0;
        for (const int part : seq.order) {
            feasible[mask].insert(part);
            mask |= (1ULL << part);
        }
    }
    return feasible;
}

std::vector<SequenceSample> emit_dataset(int blueprint_id, const BlueprintContext& ctx,
                                         const std::vector<AssemblySequence>& sequences,
                                         const DatasetConfig& config) {
    if (sequences.empty()) {
        throw InvalidInputError("emit_dataset requires a non-empty sequence set");
    }
    const int m = ctx.part_count();
    const auto feasible = prefix_feasibility(sequences);

    // Blueprint cloud: all parts at their target poses, merged surface.
    std::vector<geom::TriMesh> posed;
    posed.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        std::vector<geom::Vec3> verts;
        const auto& mesh = *ctx.meshes[static_cast<std::size_t>(i)];
        verts.reserve(mesh.vertices().size());
        for (const auto& v : mesh.vertices()) {
            verts.push_back(ctx.target_poses[static_cast<std::size_t>(i)].apply(v));
        }
        posed.emplace_back(std::move(verts), mesh.faces());
    }
    const geom::TriMesh blueprint_mesh = geom::merge_meshes(posed);
    Rng root(config.seed);
    const geom::PointCloud target_cloud = geom::sample_point_cloud(
        blueprint_mesh, Pose::identity(), config.n_t,
        root.child(0x7A16ULL + static_cast<std::uint64_t>(blueprint_id)).next_u64());

    // Canonical per-part clouds, shared across samples of this blueprint.
    std::vector<geom::PointCloud> part_clouds;
    part_clouds.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        part_clouds.push_back(geom::sample_point_cloud(
            *ctx.meshes[static_cast<std::size_t>(i)], Pose::identity(), config.n_r,
            root.child(0xBEEF00ULL + static_cast<std::uint64_t>(blueprint_id) * 64ULL +
                       static_cast<std::uint64_t>(i))
                .next_u64()));
    }

    std::vector<SequenceSample> samples;
    for (std::size_t si = 0; si < sequences.size(); ++si) {
        const auto& seq = sequences[si];
        Rng split_rng = root.child(0x51D5ULL ^ (static_cast<std::uint64_t>(blueprint_id) << 20) ^
                                   static_cast<std::uint64_t>(si));
        for (int split = 0; split < config.splits_per_sequence; ++split) {
            const int k = static_cast<int>(split_rng.uniform_index(static_cast<std::uint64_t>(m)));
            SequenceSample sample;
            sample.blueprint_id = blueprint_id;
            sample.total_parts = m;
            std::uint64_t mask = 0;
            for (int p = 0; p < k; ++p) {
                sample.assembled_ids.push_back(seq.order[static_cast<std::size_t>(p)]);
                mask |= (1ULL << seq.order[static_cast<std::size_t>(p)]);
            }
            sample.target_cloud = target_cloud;
            const auto next_it = feasible.find(mask);
            for (int part = 0; part < m; ++part) {
                if (mask & (1ULL << part)) continue;
                PartEntry entry;
                entry.part_id = part;
                entry.feasible =
                    (next_it != feasible.end() && next_it->second.count(part)) ? 1 : 0;
                entry.target_pose = ctx.target_poses[static_cast<std::size_t>(part)];
                entry.cloud = part_clouds[static_cast<std::size_t>(part)];
                sample.parts.push_back(std::move(entry));
            }
            samples.push_back(std::move(sample));
        }
    }
    return samples;
}

nlohmann::json sample_to_json(const SequenceSample& sample) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : sample.parts) {
        parts.push_back(nlohmann::json{{"id", p.part_id},
                                       {"y", p.feasible},
                                       {"pose", geom::pose_to_json(p.target_pose)},
                                       {"cloud", cloud_to_flat(p.cloud)}});
    }
    return nlohmann::json{{"blueprint_id", sample.blueprint_id},
                          {"total_parts", sample.total_parts},
                          {"assembled_ids", sample.assembled_ids},
                          {"target_cloud", cloud_to_flat(sample.target_cloud)},
                          {"parts", parts}};
}

SequenceSample sample_from_json(const nlohmann::json& j) {
    SequenceSample sample;
    sample.blueprint_id = j.at("blueprint_id").get<int>();
    sample.total_parts = j.at("total_parts").get<int>();
    sample.assembled_ids = j.at("assembled_ids").get<std::vector<int>>();
    sample.target_cloud = cloud_from_flat(j.at("target_cloud"));
    for (const auto& p : j.at("parts")) {
        PartEntry entry;
        entry.part_id = p.at("id").get<int>();
        entry.feasible = p.at("y").get<int>();
        entry.target_pose = geom::pose_from_json(p.at("pose"));
        entry.cloud = cloud_from_flat(p.at("cloud"));
        sample.parts.push_back(std::move(entry));
    }
    return sample;
}

nlohmann::json sequence_to_json(const AssemblySequence& seq) {
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& a : seq.removal_actions) {
        actions.push_back(nlohmann::json{
            {"part_id", a.part_id}, {"dir", a.direction_index}, {"magnitude", a.magnitude}});
    }
    return nlohmann::json{{"order", seq.order}, {"actions", actions}};
}

AssemblySequence sequence_from_json(const nlohmann::json& j) {
    AssemblySequence seq;
    seq.order = j.at("order").get<std::vector<int>>();
    for (const auto& a : j.at("actions")) {
        seq.removal_actions.push_back({a.at("part_id").get<int>(), a.at("dir").get<int>(),
                                       a.at("magnitude").get<double>()});
    }
    return seq;
}

} // namespace asp::disassembly
