#pragma once

#include <set>

#include "asp/model/past.hpp"

namespace asp::model {

struct TrainConfig {
    ModelConfig model;
    int epochs = 30;
    int batch_size = 16;
    double max_lr = 3e-3;
    double pct_start = 0.3;
    double div_factor = 25.0;
    double final_div_factor = 1e4;
    double weight_decay = 1e-4;
    double lambda_pose = 0.1;
    bool augment = true;
    double jitter_sigma = 0.01;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string log_path; // CSV (epoch, train_loss, val_1acc, lr); empty = none
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_one_step_acc = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
};

// Loss for one prepared sample: MSE(y, P) plus lambda_pose * (translation L2
// + axis-angle L2). Two-part blueprints train the pose head only.
NodePtr build_loss(Tape& tape, const PastModel& model, const PreparedSample& sample,
                   double lambda_pose, GraphCache* cache = nullptr,
                   ForwardResult* forward_out = nullptr);

// One-cycle schedule: cosine ramp to max_lr over pct_start of the run, then
// cosine anneal to max_lr / (div_factor * final_div_factor).
double one_cycle_lr(const TrainConfig& config, long step, long total_steps);

// AdamW with decoupled weight decay (decay skipped for biases and layer-norm
// parameters).
class AdamW {
public:
    AdamW(ParamStore& params, double weight_decay);
    void step(double lr, const Eigen::VectorXd& grad);

private:
    ParamStore& params_;
    double weight_decay_;
    long t_ = 0;
    Eigen::VectorXd m_, v_;
    std::vector<bool> decay_mask_;
};

Eigen::VectorXd param_vector(const ParamStore& params);
void set_param_vector(ParamStore& params, const Eigen::VectorXd& values);
Eigen::VectorXd grad_vector(const ParamStore& params);

// Supervised training; throws TrainingError on a non-finite loss (the
// message carries the last learning rate and batch id).
PastModel train(const std::vector<disassembly::SequenceSample>& train_samples,
                const std::vector<disassembly::SequenceSample>& val_samples,
                const TrainConfig& config, TrainResult* result = nullptr);

// Central finite differences on `checks` randomly chosen parameters against
// the analytic gradient of the total loss; returns the max relative error.
// The DGCNN neighbor graphs are frozen during the check.
double gradient_check(PastModel& model, const disassembly::SequenceSample& sample,
                      double epsilon, int checks = 200, double lambda_pose = 0.1,
                      std::uint64_t seed = 1);

// Greedy autoregressive rollout; ties broken toward the lowest part id.
std::vector<int> infer_sequence(const PastModel& model, const Mat& target,
                                const std::vector<Mat>& part_clouds,
                                const std::vector<int>& part_ids,
                                std::vector<double>* step_probabilities = nullptr);

double one_step_accuracy(const PastModel& model,
                         const std::vector<disassembly::SequenceSample>& samples);

struct BlueprintEvalCase {
    int blueprint_id = -1;
    int part_count = 0;
    PreparedSample prepared; // assembled = {} with every part listed
    std::set<std::vector<int>> feasible_sequences;
};

struct EvalResult {
    double one_step_acc = 0.0;
    double seq_acc = 0.0;
    double mean_inference_ms = 0.0;
    double baseline_one_step = 0.0; // expected accuracy of a uniform choice
    double baseline_seq = 0.0;      // |S| / M! averaged over blueprints
    std::map<int, double> seq_acc_by_part_count;
    std::map<int, int> blueprints_by_part_count;
};

EvalResult evaluate(const PastModel& model,
                    const std::vector<disassembly::SequenceSample>& samples,
                    const std::vector<BlueprintEvalCase>& blueprints);

void save_checkpoint(const std::string& path, const PastModel& model, std::uint64_t seed);
PastModel load_checkpoint(const std::string& path, std::uint64_t* seed = nullptr);

} // namespace asp::model
