#include "asp/model/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <numeric>
#include <thread>

#include "asp/core/error.hpp"
#include "asp/core/rng.hpp"

namespace asp::model {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double label_lambda_prob(const PreparedSample& sample) {
    // Two-part assemblies only train the auxiliary pose regression.
    return sample.total_parts == 2 ? 0.0 : 1.0;
}

} // namespace

NodePtr build_loss(Tape& tape, const PastModel& model, const PreparedSample& sample,
                   double lambda_pose, GraphCache* cache, ForwardResult* forward_out) {
    ForwardResult fwd = model.forward(tape, sample.target, sample.parts, cache);
    if (forward_out) *forward_out = fwd;
    const NodePtr prob_loss = mse_to(tape, fwd.probabilities, sample.labels);

    const NodePtr pose_diff =
        sub(tape, fwd.poses, make_leaf(sample.pose_targets, false));
    const NodePtr t_loss = rows_norm_sum(tape, slice_cols(tape, pose_diff, 0, 3));
    const NodePtr r_loss = rows_norm_sum(tape, slice_cols(tape, pose_diff, 3, 3));
    const NodePtr pose_loss = add(tape, t_loss, r_loss);

    return add_weighted(tape, prob_loss, label_lambda_prob(sample), pose_loss, lambda_pose);
}

double one_cycle_lr(const TrainConfig& config, long step, long total_steps) {
    const double initial = config.max_lr / config.div_factor;
    const double final_lr = initial / config.final_div_factor;
    const long warmup = std::max<long>(1, static_cast<long>(config.pct_start * total_steps));
    if (step < warmup) {
        const double tau = static_cast<double>(step) / warmup;
        return initial + (config.max_lr - initial) * 0.5 * (1.0 - std::cos(kPi * tau));
    }
    const long rest = std::max<long>(1, total_steps - warmup);
    const double tau = std::min(1.0, static_cast<double>(step - warmup) / rest);
    return final_lr + (config.max_lr - final_lr) * 0.5 * (1.0 + std::cos(kPi * tau));
}

Eigen::VectorXd param_vector(const ParamStore& params) {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(params.scalar_count()));
    Eigen::Index at = 0;
    for (const auto& [name, node] : params.entries()) {
        const Eigen::Index n = node->value.size();
        std::memcpy(flat.data() + at, node->value.data(), sizeof(double) * static_cast<std::size_t>(n));
        at += n;
    }
    return flat;
}

void set_param_vector(ParamStore& params, const Eigen::VectorXd& values) {
    Eigen::Index at = 0;
    for (const auto& [name, node] : params.entries()) {
        const Eigen::Index n = node->value.size();
        std::memcpy(node->value.data(), values.data() + at, sizeof(double) * static_cast<std::size_t>(n));
        at += n;
    }
}

Eigen::VectorXd grad_vector(const ParamStore& params) {
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.scalar_count()));
    Eigen::Index at = 0;
    for (const auto& [name, node] : params.entries()) {
        const Eigen::Index n = node->value.size();
        if (node->grad.size() == n) {
            std::memcpy(flat.data() + at, node->grad.data(),
                        sizeof(double) * static_cast<std::size_t>(n));
        }
        at += n;
    }
    return flat;
}

AdamW::AdamW(ParamStore& params, double weight_decay)
    : params_(params), weight_decay_(weight_decay) {
    const Eigen::Index n = static_cast<Eigen::Index>(params.scalar_count());
    m_ = Eigen::VectorXd::Zero(n);
    v_ = Eigen::VectorXd::Zero(n);
    decay_mask_.reserve(static_cast<std::size_t>(n));
    for (const auto& [name, node] : params.entries()) {
        const bool decay = node->value.rows() > 1; // skip biases and layer norm
        for (Eigen::Index i = 0; i < node->value.size(); ++i) decay_mask_.push_back(decay);
    }
}

void AdamW::step(double lr, const Eigen::VectorXd& grad) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    m_ = beta1 * m_ + (1.0 - beta1) * grad;
    v_ = beta2 * v_.array().matrix() + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));

    Eigen::VectorXd theta = param_vector(params_);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        double update = mhat / (std::sqrt(vhat) + eps);
        if (decay_mask_[static_cast<std::size_t>(i)]) update += weight_decay_ * theta[i];
        theta[i] -= lr * update;
    }
    set_param_vector(params_, theta);
}

PastModel train(const std::vector<disassembly::SequenceSample>& train_samples,
                const std::vector<disassembly::SequenceSample>& val_samples,
                const TrainConfig& config, TrainResult* result) {
    if (train_samples.empty()) throw InvalidInputError("train: empty dataset");

    PastModel model(config.model, config.seed);
    AdamW opt(model.params(), config.weight_decay);

    const long steps_per_epoch =
        (static_cast<long>(train_samples.size()) + config.batch_size - 1) / config.batch_size;
    const long total_steps = steps_per_epoch * config.epochs;

    std::ofstream log_file;
    if (!config.log_path.empty()) {
        log_file.open(config.log_path);
        log_file << "epoch,train_loss,val_1acc,lr\n";
    }

    Rng shuffle_rng(config.seed ^ 0x5148FFULL);
    std::vector<std::size_t> order(train_samples.size());
    std::iota(order.begin(), order.end(), 0);

    long step = 0;
    double last_lr = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates with the deterministic rng.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_index(i));
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        long batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            const std::size_t count = end - begin;

            // Per-sample gradients computed in parallel against worker-local
            // parameter copies, then reduced in sample order: results are
            // bit-identical for any thread count.
            std::vector<Eigen::VectorXd> grads(count);
            std::vector<double> losses(count);
            const Eigen::VectorXd theta = param_vector(model.params());
            const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(count)));

            const auto run_chunk = [&](PastModel& local, std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const auto& raw = train_samples[order[begin + i]];
                    AugmentOptions aug;
                    if (config.augment) {
                        aug.random_rotation = true;
                        aug.jitter_sigma = config.jitter_sigma;
                    }
                    aug.seed = Rng(config.seed)
                                   .child(0xA0C0DEULL + static_cast<std::uint64_t>(epoch))
                                   .child(order[begin + i])
                                   .next_u64();
                    const PreparedSample prepared = prepare_sample(raw, aug);
                    local.params().zero_grads();
                    Tape tape;
                    const NodePtr loss = build_loss(tape, local, prepared, config.lambda_pose);
                    losses[i] = loss->value(0, 0);
                    tape.backward(loss);
                    grads[i] = grad_vector(local.params());
                }
            };

            if (jobs == 1) {
                run_chunk(model, 0, count);
            } else {
                std::vector<std::unique_ptr<PastModel>> workers;
                for (int w = 0; w < jobs; ++w) {
                    workers.push_back(std::make_unique<PastModel>(config.model, config.seed));
                    set_param_vector(workers.back()->params(), theta);
                }
                std::vector<std::thread> pool;
                for (int w = 0; w < jobs; ++w) {
                    const std::size_t lo = count * static_cast<std::size_t>(w) /
                                           static_cast<std::size_t>(jobs);
                    const std::size_t hi = count * static_cast<std::size_t>(w + 1) /
                                           static_cast<std::size_t>(jobs);
                    pool.emplace_back([&, lo, hi, w] { run_chunk(*workers[static_cast<std::size_t>(w)], lo, hi); });
                }
                for (auto& t : pool) t.join();
            }

            Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
            double batch_loss = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                grad += grads[i];
                batch_loss += losses[i];
            }
            grad /= static_cast<double>(count);
            batch_loss /= static_cast<double>(count);

            if (!std::isfinite(batch_loss)) {
                throw TrainingError("training diverged: non-finite loss (last lr=" +
                                    std::to_string(last_lr) + ", batch=" + std::to_string(batches) +
                                    ", epoch=" + std::to_string(epoch) + ")");
            }

            last_lr = one_cycle_lr(config, step, total_steps);
            opt.step(last_lr, grad);
            ++step;
            ++batches;
            epoch_loss += batch_loss;
        }
        epoch_loss /= std::max<long>(1, batches);

        const double val_acc = val_samples.empty() ? 0.0 : one_step_accuracy(model, val_samples);
        if (result) result->log.push_back({epoch, epoch_loss, val_acc, last_lr});
        if (log_file.is_open()) {
            log_file << epoch << ',' << epoch_loss << ',' << val_acc << ',' << last_lr << '\n';
        }
    }
    return model;
}

double gradient_check(PastModel& model, const disassembly::SequenceSample& sample,
                      double epsilon, int checks, double lambda_pose, std::uint64_t seed) {
    if (epsilon < 1e-7 || epsilon > 1e-3) {
        throw InvalidInputError("gradient_check epsilon must lie in [1e-7, 1e-3]");
    }
    const PreparedSample prepared = prepare_sample(sample);

    // Freeze the DGCNN graphs so the finite-difference path matches the
    // differentiable path (graph selection is non-differentiable).
    GraphCache cache;
    {
        Tape tape;
        build_loss(tape, model, prepared, lambda_pose, &cache);
    }

    model.params().zero_grads();
    Tape tape;
    const NodePtr loss = build_loss(tape, model, prepared, lambda_pose, &cache);
    tape.backward(loss);
    const Eigen::VectorXd analytic = grad_vector(model.params());
    Eigen::VectorXd theta = param_vector(model.params());

    const auto loss_at = [&](const Eigen::VectorXd& values) {
        set_param_vector(model.params(), values);
        Tape local;
        const NodePtr l = build_loss(local, model, prepared, lambda_pose, &cache);
        return l->value(0, 0);
    };

    Rng rng(seed);
    double max_rel_error = 0.0;
    for (int c = 0; c < checks; ++c) {
        const Eigen::Index i =
            static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(theta.size())));
        Eigen::VectorXd perturbed = theta;
        perturbed[i] = theta[i] + epsilon;
        const double up = loss_at(perturbed);
        perturbed[i] = theta[i] - epsilon;
        const double down = loss_at(perturbed);
        const double numeric = (up - down) / (2.0 * epsilon);
        const double a = analytic[i];
        if (a == 0.0 && numeric == 0.0) continue;
        const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
        max_rel_error = std::max(max_rel_error, rel);
    }
    set_param_vector(model.params(), theta);
    return max_rel_error;
}

std::vector<int> infer_sequence(const PastModel& model, const Mat& target,
                                const std::vector<Mat>& part_clouds,
                                const std::vector<int>& part_ids,
                                std::vector<double>* step_probabilities) {
    if (part_clouds.size() != part_ids.size() || part_clouds.empty()) {
        throw InvalidInputError("infer_sequence: mismatched part inputs");
    }
    std::vector<int> remaining(part_ids.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> order;
    while (!remaining.empty()) {
        if (remaining.size() == 1) {
            order.push_back(part_ids[static_cast<std::size_t>(remaining[0])]);
            if (step_probabilities) step_probabilities->push_back(1.0);
            remaining.clear();
            break;
        }
        std::vector<Mat> clouds;
        clouds.reserve(remaining.size());
        for (const int r : remaining) clouds.push_back(part_clouds[static_cast<std::size_t>(r)]);
        Tape tape;
        const ForwardResult fwd = model.forward(tape, target, clouds);
        int best = 0;
        double best_p = fwd.probabilities->value(0, 0);
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const double p = fwd.probabilities->value(static_cast<Eigen::Index>(i), 0);
            const bool better =
                p > best_p ||
                (p == best_p && part_ids[static_cast<std::size_t>(remaining[i])] <
                                    part_ids[static_cast<std::size_t>(remaining[static_cast<std::size_t>(best)])]);
            if (better) {
                best_p = p;
                best = static_cast<int>(i);
            }
        }
        order.push_back(part_ids[static_cast<std::size_t>(remaining[static_cast<std::size_t>(best)])]);
        if (step_probabilities) step_probabilities->push_back(best_p);
        remaining.erase(remaining.begin() + best);
    }
    return order;
}

double one_step_accuracy(const PastModel& model,
                         const std::vector<disassembly::SequenceSample>& samples) {
    if (samples.empty()) return 0.0;
    long correct = 0;
    for (const auto& raw : samples) {
        const PreparedSample prepared = prepare_sample(raw);
        Tape tape;
        const ForwardResult fwd = model.forward(tape, prepared.target, prepared.parts);
        Eigen::Index best = 0;
        fwd.probabilities->value.col(0).maxCoeff(&best);
        if (prepared.labels(best, 0) > 0.5) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

EvalResult evaluate(const PastModel& model,
                    const std::vector<disassembly::SequenceSample>& samples,
                    const std::vector<BlueprintEvalCase>& blueprints) {
    EvalResult out;
    out.one_step_acc = one_step_accuracy(model, samples);

    // Label-derived baseline: expected accuracy of a uniform random choice.
    if (!samples.empty()) {
        double acc = 0.0;
        for (const auto& s : samples) {
            int pos = 0;
            for (const auto& p : s.parts) pos += p.feasible;
            acc += static_cast<double>(pos) / static_cast<double>(s.parts.size());
        }
        out.baseline_one_step = acc / static_cast<double>(samples.size());
    }

    if (blueprints.empty()) return out;
    long seq_hits = 0;
    double total_ms = 0.0;
    std::map<int, long> hits_by_count, total_by_count;
    double baseline_sum = 0.0;
    for (const auto& bp : blueprints) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<int> order =
            infer_sequence(model, bp.prepared.target, bp.prepared.parts, bp.prepared.part_ids);
        total_ms +=
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        const bool hit = bp.feasible_sequences.count(order) > 0;
        seq_hits += hit ? 1 : 0;
        hits_by_count[bp.part_count] += hit ? 1 : 0;
        total_by_count[bp.part_count] += 1;

        double mfact = 1.0;
        for (int i = 2; i <= bp.part_count; ++i) mfact *= i;
        baseline_sum += static_cast<double>(bp.feasible_sequences.size()) / mfact;
    }
    out.seq_acc = static_cast<double>(seq_hits) / static_cast<double>(blueprints.size());
    out.mean_inference_ms = total_ms / static_cast<double>(blueprints.size());
    out.baseline_seq = baseline_sum / static_cast<double>(blueprints.size());
    for (const auto& [count, total] : total_by_count) {
        out.seq_acc_by_part_count[count] =
            static_cast<double>(hits_by_count[count]) / static_cast<double>(total);
        out.blueprints_by_part_count[count] = static_cast<int>(total);
    }
    return out;
}

void save_checkpoint(const std::string& path, const PastModel& model, std::uint64_t seed) {
    nlohmann::json header;
    header["config"] = {{"hidden", model.config().hidden},
                        {"blocks", model.config().blocks},
                        {"k_nn", model.config().k_nn},
                        {"heads", model.config().heads}};
    header["seed"] = seed;
    nlohmann::json plist = nlohmann::json::array();
    for (const auto& [name, node] : model.params().entries()) {
        plist.push_back({{"name", name}, {"rows", node->value.rows()}, {"cols", node->value.cols()}});
    }
    header["params"] = plist;
    const std::string header_str = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write checkpoint: " + path);
    const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& [name, node] : model.params().entries()) {
        for (Eigen::Index j = 0; j < node->value.cols(); ++j) {
            for (Eigen::Index i = 0; i < node->value.rows(); ++i) {
                const float f = static_cast<float>(node->value(i, j));
                out.write(reinterpret_cast<const char*>(&f), sizeof(f));
            }
        }
    }
}

PastModel load_checkpoint(const std::string& path, std::uint64_t* seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot read checkpoint: " + path);
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string header_str(len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(len));
    const nlohmann::json header = nlohmann::json::parse(header_str);

    ModelConfig config;
    config.hidden = header.at("config").at("hidden").get<int>();
    config.blocks = header.at("config").at("blocks").get<int>();
    config.k_nn = header.at("config").at("k_nn").get<int>();
    config.heads = header.at("config").at("heads").get<int>();
    if (seed) *seed = header.at("seed").get<std::uint64_t>();

    PastModel model(config, header.at("seed").get<std::uint64_t>());
    for (const auto& entry : header.at("params")) {
        const std::string name = entry.at("name").get<std::string>();
        const Eigen::Index rows = entry.at("rows").get<Eigen::Index>();
        const Eigen::Index cols = entry.at("cols").get<Eigen::Index>();
        const NodePtr& node = model.params().get(name);
        if (node->value.rows() != rows || node->value.cols() != cols) {
            throw InvalidInputError("checkpoint shape mismatch for " + name);
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) {
                float f = 0.0f;
                in.read(reinterpret_cast<char*>(&f), sizeof(f));
                node->value(i, j) = static_cast<double>(f);
            }
        }
    }
    if (!in) throw InvalidInputError("checkpoint truncated: " + path);
    return model;
}

} // namespace asp::model
