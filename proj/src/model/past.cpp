#include "asp/model/past.hpp"

#include <algorithm>
#include <cmath>

#include "asp/core/error.hpp"
#include "asp/core/rng.hpp"

namespace asp::model {

namespace {

constexpr int kEdgeConvLayers = 2;

std::string block_unit(int block, const char* unit) {
    return "b" + std::to_string(block) + "." + std::string(unit);
}

} // namespace

NodePtr ParamStore::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (index_.count(name)) throw InvalidInputError("duplicate parameter name: " + name);
    NodePtr node = make_leaf(Mat::Zero(rows, cols), true);
    index_[name] = entries_.size();
    entries_.emplace_back(name, node);
    return node;
}

const NodePtr& ParamStore::get(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw InvalidInputError("unknown parameter: " + name);
    return entries_[it->second].second;
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, node] : entries_) n += static_cast<std::size_t>(node->value.size());
    return n;
}

void ParamStore::zero_grads() {
    for (auto& [name, node] : entries_) node->zero_grad();
}

std::vector<int> knn_graph(const Mat& features, int k) {
    const int n = static_cast<int>(features.rows());
    if (k >= n) throw InvalidInputError("knn_graph: need more points than neighbors");
    std::vector<int> flat(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
    std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            dist[static_cast<std::size_t>(j)] = {
                (features.row(i) - features.row(j)).squaredNorm(), j};
        }
        dist[static_cast<std::size_t>(i)].first = std::numeric_limits<double>::max(); // no self
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (int j = 0; j < k; ++j) {
            flat[static_cast<std::size_t>(i * k + j)] = dist[static_cast<std::size_t>(j)].second;
        }
    }
    return flat;
}

PastModel::PastModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    const int h = config_.hidden;
    if (h < 8 || config_.blocks < 1 || config_.k_nn < 1) {
        throw InvalidInputError("model config out of range (h >= 8, L >= 1, k_nn >= 1)");
    }

    // Shared DGCNN encoder: layer 0 consumes raw xyz+normals (6 -> 12 edge
    // features), layer 1 consumes h-dim features (2h edge features).
    params_.add("enc0.w", 12, h);
    params_.add("enc0.b", 1, h);
    params_.add("enc1.w", 2 * h, h);
    params_.add("enc1.b", 1, h);

    const auto add_attention_unit = [&](const std::string& unit) {
        params_.add(unit + ".wq", h, h);
        params_.add(unit + ".wk", h, h);
        params_.add(unit + ".wv", h, h);
        params_.add(unit + ".ln1.g", 1, h);
        params_.add(unit + ".ln1.b", 1, h);
        params_.add(unit + ".mlp.w1", h, 2 * h);
        params_.add(unit + ".mlp.b1", 1, 2 * h);
        params_.add(unit + ".mlp.w2", 2 * h, h);
        params_.add(unit + ".mlp.b2", 1, h);
        params_.add(unit + ".ln2.g", 1, h);
        params_.add(unit + ".ln2.b", 1, h);
    };
    for (int b = 0; b < config_.blocks; ++b) {
        add_attention_unit(block_unit(b, "v_self"));
        add_attention_unit(block_unit(b, "u_self"));
        add_attention_unit(block_unit(b, "v_cross"));
        add_attention_unit(block_unit(b, "u_cross"));
    }

    params_.add("prob.w1", h, h);
    params_.add("prob.b1", 1, h);
    params_.add("prob.w2", h, 1);
    params_.add("prob.b2", 1, 1);
    params_.add("pose.w1", h, h);
    params_.add("pose.b1", 1, h);
    params_.add("pose.w2", h, 6);
    params_.add("pose.b2", 1, 6);

    // Xavier-uniform weights, zero biases, unit layer-norm gains.
    Rng rng(seed);
    for (auto& [name, node] : params_.entries()) {
        Mat& w = node->value;
        if (name.find(".b") != std::string::npos && w.rows() == 1) {
            w.setZero();
        } else if (name.find(".ln") != std::string::npos) {
            w.setConstant(name.ends_with(".g") ? 1.0 : 0.0);
        } else {
            const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
            Rng wr = rng.child(std::hash<std::string>{}(name));
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                for (Eigen::Index j = 0; j < w.cols(); ++j) {
                    w(i, j) = wr.uniform(-bound, bound);
                }
            }
        }
    }
}

NodePtr PastModel::edge_conv(Tape& tape, const NodePtr& features, const Mat& graph_source,
                             int layer, const std::vector<int>* frozen,
                             std::vector<int>* out_graph) const {
    const int k = config_.k_nn;
    const int n = static_cast<int>(features->value.rows());
    std::vector<int> graph;
    if (frozen) {
        graph = *frozen;
    } else {
        graph = knn_graph(graph_source, k);
    }
    if (out_graph) *out_graph = graph;

    std::vector<int> center(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) center[static_cast<std::size_t>(i * k + j)] = i;
    }
    const NodePtr xi = gather_rows(tape, features, std::move(center));
    const NodePtr xj = gather_rows(tape, features, graph);
    const NodePtr edge = concat_cols(tape, xi, sub(tape, xj, xi));
    const std::string prefix = "enc" + std::to_string(layer);
    const NodePtr pre = add_rowvec(tape, matmul(tape, edge, params_.get(prefix + ".w")),
                                   params_.get(prefix + ".b"));
    return group_max_rows(tape, gelu(tape, pre), k);
}

NodePtr PastModel::encode_target(Tape& tape, const Mat& cloud, const std::vector<int>* frozen_l0,
                                 std::vector<int>* out_l0, const std::vector<int>* frozen_l1,
                                 std::vector<int>* out_l1) const {
    if (cloud.rows() < config_.k_nn + 1) {
        throw InvalidInputError("encode: cloud smaller than k_nn + 1 points");
    }
    const NodePtr input = make_leaf(cloud, false);
    // layer 0: graph over xyz coordinates
    const NodePtr f0 = edge_conv(tape, input, cloud.leftCols(3), 0, frozen_l0, out_l0);
    // layer 1: graph over layer-0 feature distances
    return edge_conv(tape, f0, f0->value, 1, frozen_l1, out_l1);
}

NodePtr PastModel::encode_part(Tape& tape, const Mat& cloud, const std::vector<int>* frozen_l0,
                               std::vector<int>* out_l0, const std::vector<int>* frozen_l1,
                               std::vector<int>* out_l1) const {
    const NodePtr per_point =
        encode_target(tape, cloud, frozen_l0, out_l0, frozen_l1, out_l1);
    return colwise_max(tape, per_point);
}

NodePtr PastModel::attention(Tape& tape, const NodePtr& q, const NodePtr& k,
                             const std::string& unit) const {
    const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
    const NodePtr qm = matmul(tape, q, params_.get(unit + ".wq"));
    const NodePtr km = matmul(tape, k, params_.get(unit + ".wk"));
    const NodePtr vm = matmul(tape, k, params_.get(unit + ".wv"));
    const NodePtr logits = scale(tape, matmul_nt(tape, qm, km), inv_sqrt_h);
    const NodePtr weights = softmax_rows(tape, logits);
    const NodePtr mixed = matmul(tape, weights, vm);
    const NodePtr x1 = layer_norm_rows(tape, add(tape, q, mixed), params_.get(unit + ".ln1.g"),
                                       params_.get(unit + ".ln1.b"));
    const NodePtr hidden = gelu(
        tape, add_rowvec(tape, matmul(tape, x1, params_.get(unit + ".mlp.w1")),
                         params_.get(unit + ".mlp.b1")));
    const NodePtr mlp_out = add_rowvec(tape, matmul(tape, hidden, params_.get(unit + ".mlp.w2")),
                                       params_.get(unit + ".mlp.b2"));
    return layer_norm_rows(tape, add(tape, x1, mlp_out), params_.get(unit + ".ln2.g"),
                           params_.get(unit + ".ln2.b"));
}

Mat PastModel::attention_weights(const Mat& q, const Mat& k, const std::string& unit) const {
    Tape tape;
    const NodePtr qn = make_leaf(q, false);
    const NodePtr kn = make_leaf(k, false);
    const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
    const NodePtr qm = matmul(tape, qn, params_.get(unit + ".wq"));
    const NodePtr km = matmul(tape, kn, params_.get(unit + ".wk"));
    const NodePtr logits = scale(tape, matmul_nt(tape, qm, km), inv_sqrt_h);
    return softmax_rows(tape, logits)->value;
}

std::pair<NodePtr, NodePtr> PastModel::past_block(Tape& tape, const NodePtr& v, const NodePtr& u,
                                                  int block) const {
    const NodePtr v1 = attention(tape, v, v, block_unit(block, "v_self"));
    const NodePtr u1 = attention(tape, u, u, block_unit(block, "u_self"));
    const NodePtr v2 = attention(tape, v1, u1, block_unit(block, "v_cross"));
    const NodePtr u2 = attention(tape, u1, v1, block_unit(block, "u_cross"));
    return {v2, u2};
}

ForwardResult PastModel::forward(Tape& tape, const Mat& target, const std::vector<Mat>& parts,
                                 GraphCache* cache) const {
    if (parts.empty()) throw InvalidInputError("forward requires at least one remaining part");

    const bool use_cache = cache && cache->filled;
    if (cache && !cache->filled) {
        cache->target_layers.assign(kEdgeConvLayers, {});
        cache->part_layers.assign(parts.size(), std::vector<std::vector<int>>(kEdgeConvLayers));
    }

    NodePtr v = encode_target(tape, target,
                              use_cache ? &cache->target_layers[0] : nullptr,
                              cache && !use_cache ? &cache->target_layers[0] : nullptr,
                              use_cache ? &cache->target_layers[1] : nullptr,
                              cache && !use_cache ? &cache->target_layers[1] : nullptr);

    std::vector<NodePtr> part_rows;
    part_rows.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto* layers = cache ? &cache->part_layers[i] : nullptr;
        part_rows.push_back(encode_part(tape, parts[i],
                                        use_cache && layers ? &(*layers)[0] : nullptr,
                                        layers && !use_cache ? &(*layers)[0] : nullptr,
                                        use_cache && layers ? &(*layers)[1] : nullptr,
                                        layers && !use_cache ? &(*layers)[1] : nullptr));
    }
    if (cache) cache->filled = true;

    // Stack part feature rows into U.
    NodePtr u = part_rows[0];
    if (part_rows.size() > 1) {
        Mat stacked(static_cast<Eigen::Index>(part_rows.size()), config_.hidden);
        for (std::size_t i = 0; i < part_rows.size(); ++i) {
            stacked.row(static_cast<Eigen::Index>(i)) = part_rows[i]->value.row(0);
        }
        NodePtr stacked_node = tape.emit(std::move(stacked), true);
        stacked_node->ensure_grad();
        stacked_node->backward = [stacked_node, part_rows] {
            for (std::size_t i = 0; i < part_rows.size(); ++i) {
                if (part_rows[i]->requires_grad) {
                    part_rows[i]->ensure_grad();
                    part_rows[i]->grad.row(0) +=
                        stacked_node->grad.row(static_cast<Eigen::Index>(i));
                }
            }
        };
        u = stacked_node;
    }

    for (int b = 0; b < config_.blocks; ++b) {
        auto [v2, u2] = past_block(tape, v, u, b);
        v = v2;
        u = u2;
    }

    ForwardResult out;
    out.part_features = u;
    const NodePtr ph = gelu(tape, add_rowvec(tape, matmul(tape, u, params_.get("prob.w1")),
                                             params_.get("prob.b1")));
    out.probabilities = sigmoid(
        tape, add_rowvec(tape, matmul(tape, ph, params_.get("prob.w2")), params_.get("prob.b2")));
    const NodePtr qh = gelu(tape, add_rowvec(tape, matmul(tape, u, params_.get("pose.w1")),
                                             params_.get("pose.b1")));
    out.poses = add_rowvec(tape, matmul(tape, qh, params_.get("pose.w2")),
                           params_.get("pose.b2"));
    return out;
}

PreparedSample prepare_sample(const disassembly::SequenceSample& sample,
                              const AugmentOptions& augment) {
    PreparedSample out;
    out.total_parts = sample.total_parts;
    out.blueprint_id = sample.blueprint_id;

    const Eigen::Index nt = sample.target_cloud.size();
    const Eigen::RowVector3d centroid = sample.target_cloud.points.colwise().mean();
    double radius = 1e-9;
    for (Eigen::Index i = 0; i < nt; ++i) {
        radius = std::max(radius, (sample.target_cloud.points.row(i) - centroid).norm());
    }
    const double s = 1.0 / radius;

    geom::Mat3 rot = geom::Mat3::Identity();
    Rng rng(augment.seed);
    if (augment.random_rotation) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double u3 = rng.uniform();
        const double two_pi = 6.283185307179586476925286766559;
        const double a = std::sqrt(1.0 - u1);
        const double b = std::sqrt(u1);
        const geom::Quat q(a * std::sin(two_pi * u2), a * std::cos(two_pi * u2),
                           b * std::sin(two_pi * u3), b * std::cos(two_pi * u3));
        rot = q.normalized().toRotationMatrix();
    }

    out.target.resize(nt, 6);
    for (Eigen::Index i = 0; i < nt; ++i) {
        geom::Vec3 p = sample.target_cloud.points.row(i).transpose();
        p = rot * ((p - centroid.transpose()) * s);
        geom::Vec3 n = rot * sample.target_cloud.normals.row(i).transpose();
        if (augment.jitter_sigma > 0.0) {
            p += augment.jitter_sigma *
                 geom::Vec3(rng.normal(), rng.normal(), rng.normal());
        }
        out.target.row(i) << p.x(), p.y(), p.z(), n.x(), n.y(), n.z();
    }

    out.labels.resize(static_cast<Eigen::Index>(sample.parts.size()), 1);
    out.pose_targets.resize(static_cast<Eigen::Index>(sample.parts.size()), 6);
    for (std::size_t pi = 0; pi < sample.parts.size(); ++pi) {
        const auto& part = sample.parts[pi];
        out.part_ids.push_back(part.part_id);
        out.labels(static_cast<Eigen::Index>(pi), 0) = part.feasible;

        const Eigen::Index nr = part.cloud.size();
        Mat pc(nr, 6);
        for (Eigen::Index i = 0; i < nr; ++i) {
            // canonical orientation kept; only the blueprint scale is shared
            const geom::Vec3 p = part.cloud.points.row(i).transpose() * s;
            const geom::Vec3 n = part.cloud.normals.row(i).transpose();
            pc.row(i) << p.x(), p.y(), p.z(), n.x(), n.y(), n.z();
        }
        out.parts.push_back(std::move(pc));

        // pose target mapped into the normalized (and rotated) frame
        const geom::Vec3 t_new = rot * ((part.target_pose.t - centroid.transpose()) * s);
        const geom::Quat q_new = geom::Quat(rot) * part.target_pose.q;
        const geom::Vec3 aa = geom::quat_to_axis_angle(q_new.normalized());
        out.pose_targets.row(static_cast<Eigen::Index>(pi)) << t_new.x(), t_new.y(), t_new.z(),
            aa.x(), aa.y(), aa.z();
    }
    return out;
}

} // namespace asp::model
