#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace asp::model {

using Mat = Eigen::MatrixXd;

// A value in the computation graph. Gradients are accumulated into `grad`
// by the backward pass; parameters are long-lived nodes owned outside the
// tape, everything else lives for one forward/backward cycle.
struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    std::function<void()> backward;

    void ensure_grad() {
        if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
            grad = Mat::Zero(value.rows(), value.cols());
        }
    }
    void zero_grad() { grad.setZero(); }
};

using NodePtr = std::shared_ptr<Node>;

NodePtr make_leaf(Mat value, bool requires_grad);

// Records op nodes in creation order (a topological order of the DAG) and
// replays their backward closures in reverse.
class Tape {
public:
    NodePtr emit(Mat value, bool requires_grad) {
        auto node = std::make_shared<Node>();
        node->value = std::move(value);
        node->requires_grad = requires_grad;
        order_.push_back(node);
        return node;
    }

    void backward(const NodePtr& loss);
    void clear() { order_.clear(); }
    std::size_t size() const { return order_.size(); }

private:
    std::vector<NodePtr> order_;
};

// ---- primitive ops ---------------------------------------------------------

NodePtr matmul(Tape& t, const NodePtr& a, const NodePtr& b);    // a * b
NodePtr matmul_nt(Tape& t, const NodePtr& a, const NodePtr& b); // a * b^T
NodePtr add(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr sub(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr add_rowvec(Tape& t, const NodePtr& a, const NodePtr& row); // broadcast 1 x C
NodePtr scale(Tape& t, const NodePtr& a, double s);
NodePtr concat_cols(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr slice_cols(Tape& t, const NodePtr& a, Eigen::Index start, Eigen::Index count);
NodePtr gather_rows(Tape& t, const NodePtr& a, std::vector<int> rows);
// max over fixed-size row groups: input (N*k) x C -> N x C
NodePtr group_max_rows(Tape& t, const NodePtr& a, int group);
NodePtr colwise_max(Tape& t, const NodePtr& a); // 1 x C
NodePtr gelu(Tape& t, const NodePtr& a);        // exact erf form (smooth)
NodePtr sigmoid(Tape& t, const NodePtr& a);
NodePtr softmax_rows(Tape& t, const NodePtr& a);
NodePtr layer_norm_rows(Tape& t, const NodePtr& a, const NodePtr& gamma, const NodePtr& beta);
// mean squared error against a constant target, scalar output
NodePtr mse_to(Tape& t, const NodePtr& a, const Mat& target);
// sum over rows of the Euclidean row norm, scalar output
NodePtr rows_norm_sum(Tape& t, const NodePtr& a);
NodePtr add_weighted(Tape& t, const NodePtr& a, double wa, const NodePtr& b, double wb);

} // namespace asp::model
