#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "asp/disassembly/dataset.hpp"
#include "asp/geom/pose.hpp"
#include "asp/model/tensor.hpp"

namespace asp::model {

struct ModelConfig {
    int hidden = 64;  // h
    int blocks = 2;   // L
    int k_nn = 8;
    int heads = 1; // single-head attention; kept as a config knob
};

// Ordered parameter registry; checkpoint blob order == registration order.
class ParamStore {
public:
    NodePtr add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
    const NodePtr& get(const std::string& name) const;
    const std::vector<std::pair<std::string, NodePtr>>& entries() const { return entries_; }
    std::size_t scalar_count() const;
    void zero_grads();

private:
    std::vector<std::pair<std::string, NodePtr>> entries_;
    std::map<std::string, std::size_t> index_;
};

// Neighbor indices per DGCNN layer, flattened row-major (point-major).
struct GraphCache {
    std::vector<std::vector<int>> target_layers; // one entry per edge-conv layer
    std::vector<std::vector<std::vector<int>>> part_layers;
    bool filled = false;
};

struct ForwardResult {
    NodePtr probabilities; // (M-k) x 1, sigmoid outputs
    NodePtr poses;         // (M-k) x 6: translation then axis-angle
    NodePtr part_features; // (M-k) x h after the last block
};

// PAST: DGCNN encoders (shared weights for target and parts), L two-stage
// attention blocks, probability head and auxiliary pose head.
class PastModel {
public:
    PastModel(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // target: N_t x 6 (xyz + normal), parts: each N_r x 6.
    ForwardResult forward(Tape& tape, const Mat& target, const std::vector<Mat>& parts,
                          GraphCache* cache = nullptr) const;

    NodePtr encode_target(Tape& tape, const Mat& cloud,
                          const std::vector<int>* frozen_l0 = nullptr,
                          std::vector<int>* out_l0 = nullptr,
                          const std::vector<int>* frozen_l1 = nullptr,
                          std::vector<int>* out_l1 = nullptr) const;
    NodePtr encode_part(Tape& tape, const Mat& cloud, const std::vector<int>* frozen_l0 = nullptr,
                        std::vector<int>* out_l0 = nullptr,
                        const std::vector<int>* frozen_l1 = nullptr,
                        std::vector<int>* out_l1 = nullptr) const;

    // Single-head scaled dot-product attention closed with residual + layer
    // norm + 2-layer MLP + residual + layer norm. `unit` names the parameter
    // group ("b0.v_self", ...).
    NodePtr attention(Tape& tape, const NodePtr& q, const NodePtr& k,
                      const std::string& unit) const;
    // Raw softmax weight matrix of one attention application (rows: queries).
    Mat attention_weights(const Mat& q, const Mat& k, const std::string& unit) const;

    std::pair<NodePtr, NodePtr> past_block(Tape& tape, const NodePtr& v, const NodePtr& u,
                                           int block) const;

private:
    NodePtr edge_conv(Tape& tape, const NodePtr& features, const Mat& graph_source, int layer,
                      const std::vector<int>* frozen, std::vector<int>* out_graph) const;

    ModelConfig config_;
    ParamStore params_;
};

// k-nearest-neighbor indices (excluding self), flattened per point; ties are
// broken by index so the graph is deterministic.
std::vector<int> knn_graph(const Mat& features, int k);

// ---- sample preprocessing --------------------------------------------------

struct PreparedSample {
    Mat target;             // N_t x 6 normalized
    std::vector<Mat> parts; // canonical part clouds, scaled to match
    std::vector<int> part_ids;
    Mat labels;       // (M-k) x 1
    Mat pose_targets; // (M-k) x 6 in the normalized blueprint frame
    int total_parts = 0;
    int blueprint_id = -1;
};

struct AugmentOptions {
    bool random_rotation = false;
    double jitter_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Re-centers the target cloud to its centroid and scales it into the unit
// ball; part clouds share the scale, pose targets move to the same frame.
// Augmentation adds a global rotation and Gaussian jitter on target points.
PreparedSample prepare_sample(const disassembly::SequenceSample& sample,
                              const AugmentOptions& augment = {});

} // namespace asp::model
