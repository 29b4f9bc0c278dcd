#include "asp/model/tensor.hpp"

#include <cmath>

#include "asp/core/error.hpp"

namespace asp::model {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
} // namespace

NodePtr make_leaf(Mat value, bool requires_grad) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    if (requires_grad) node->ensure_grad();
    return node;
}

void Tape::backward(const NodePtr& loss) {
    if (loss->value.rows() != 1 || loss->value.cols() != 1) {
        throw InvalidInputError("backward expects a scalar loss node");
    }
    loss->ensure_grad();
    loss->grad(0, 0) = 1.0;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        if ((*it)->requires_grad && (*it)->backward) (*it)->backward();
    }
}

NodePtr matmul(Tape& t, const NodePtr& a, const NodePtr& b) {
    NodePtr out = t.emit(a->value * b->value, a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad.noalias() += out->grad * b->value.transpose();
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad.noalias() += a->value.transpose() * out->grad;
            }
        };
    }
    return out;
}

NodePtr matmul_nt(Tape& t, const NodePtr& a, const NodePtr& b) {
    NodePtr out = t.emit(a->value * b->value.transpose(), a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad.noalias() += out->grad * b->value;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad.noalias() += out->grad.transpose() * a->value;
            }
        };
    }
    return out;
}

NodePtr add(Tape& t, const NodePtr& a, const NodePtr& b) {
    NodePtr out = t.emit(a->value + b->value, a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad += out->grad;
            }
        };
    }
    return out;
}

NodePtr sub(Tape& t, const NodePtr& a, const NodePtr& b) {
    NodePtr out = t.emit(a->value - b->value, a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, b, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad -= out->grad;
            }
        };
    }
    return out;
}

NodePtr add_rowvec(Tape& t, const NodePtr& a, const NodePtr& row) {
    Mat v = a->value;
    v.rowwise() += Eigen::RowVectorXd(row->value.row(0));
    NodePtr out = t.emit(std::move(v), a->requires_grad || row->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, row, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad;
            }
            if (row->requires_grad) {
                row->ensure_grad();
                row->grad.row(0) += out->grad.colwise().sum();
            }
        };
    }
    return out;
}

NodePtr scale(Tape& t, const NodePtr& a, double s) {
    NodePtr out = t.emit(a->value * s, a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, s, out] {
            a->ensure_grad();
            a->grad += out->grad * s;
        };
    }
    return out;
}

NodePtr concat_cols(Tape& t, const NodePtr& a, const NodePtr& b) {
    Mat v(a->value.rows(), a->value.cols() + b->value.cols());
    v << a->value, b->value;
    NodePtr out = t.emit(std::move(v), a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        const Eigen::Index ca = a->value.cols();
        const Eigen::Index cb = b->value.cols();
        out->backward = [a, b, out, ca, cb] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad.leftCols(ca);
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad += out->grad.rightCols(cb);
            }
        };
    }
    return out;
}

NodePtr slice_cols(Tape& t, const NodePtr& a, Eigen::Index start, Eigen::Index count) {
    NodePtr out = t.emit(a->value.middleCols(start, count), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out, start, count] {
            a->ensure_grad();
            a->grad.middleCols(start, count) += out->grad;
        };
    }
    return out;
}

NodePtr gather_rows(Tape& t, const NodePtr& a, std::vector<int> rows) {
    Mat v(static_cast<Eigen::Index>(rows.size()), a->value.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        v.row(static_cast<Eigen::Index>(i)) = a->value.row(rows[i]);
    }
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out, rows = std::move(rows)] {
            a->ensure_grad();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                a->grad.row(rows[i]) += out->grad.row(static_cast<Eigen::Index>(i));
            }
        };
    }
    return out;
}

NodePtr group_max_rows(Tape& t, const NodePtr& a, int group) {
    const Eigen::Index rows = a->value.rows();
    const Eigen::Index cols = a->value.cols();
    if (group <= 0 || rows % group != 0) {
        throw InvalidInputError("group_max_rows: row count not divisible by group size");
    }
    const Eigen::Index n = rows / group;
    Mat v(n, cols);
    auto argmax = std::make_shared<Eigen::MatrixXi>(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            double best = a->value(i * group, c);
            int best_r = 0;
            for (int r = 1; r < group; ++r) {
                const double cand = a->value(i * group + r, c);
                if (cand > best) {
                    best = cand;
                    best_r = r;
                }
            }
            v(i, c) = best;
            (*argmax)(i, c) = best_r;
        }
    }
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out, argmax, group] {
            a->ensure_grad();
            for (Eigen::Index i = 0; i < out->grad.rows(); ++i) {
                for (Eigen::Index c = 0; c < out->grad.cols(); ++c) {
                    a->grad(i * group + (*argmax)(i, c), c) += out->grad(i, c);
                }
            }
        };
    }
    return out;
}

NodePtr colwise_max(Tape& t, const NodePtr& a) {
    const Eigen::Index cols = a->value.cols();
    Mat v(1, cols);
    auto argmax = std::make_shared<std::vector<Eigen::Index>>(static_cast<std::size_t>(cols));
    for (Eigen::Index c = 0; c < cols; ++c) {
        Eigen::Index row = 0;
        v(0, c) = a->value.col(c).maxCoeff(&row);
        (*argmax)[static_cast<std::size_t>(c)] = row;
    }
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out, argmax] {
            a->ensure_grad();
            for (Eigen::Index c = 0; c < out->grad.cols(); ++c) {
                a->grad((*argmax)[static_cast<std::size_t>(c)], c) += out->grad(0, c);
            }
        };
    }
    return out;
}

NodePtr gelu(Tape& t, const NodePtr& a) {
    Mat v = a->value.unaryExpr(
        [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out] {
            a->ensure_grad();
            a->grad.array() += out->grad.array() * a->value.array().unaryExpr([](double x) {
                const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
                const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
                return cdf + x * pdf;
            });
        };
    }
    return out;
}

NodePtr sigmoid(Tape& t, const NodePtr& a) {
    Mat v = a->value.unaryExpr([](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    });
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out] {
            a->ensure_grad();
            a->grad.array() +=
                out->grad.array() * out->value.array() * (1.0 - out->value.array());
        };
    }
    return out;
}

NodePtr softmax_rows(Tape& t, const NodePtr& a) {
    Mat v = a->value;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double m = v.row(i).maxCoeff();
        v.row(i) = (v.row(i).array() - m).exp();
        v.row(i) /= v.row(i).sum();
    }
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out] {
            a->ensure_grad();
            for (Eigen::Index i = 0; i < out->value.rows(); ++i) {
                const double dot = out->grad.row(i).dot(out->value.row(i));
                a->grad.row(i).array() +=
                    out->value.row(i).array() * (out->grad.row(i).array() - dot);
            }
        };
    }
    return out;
}

NodePtr layer_norm_rows(Tape& t, const NodePtr& a, const NodePtr& gamma, const NodePtr& beta) {
    constexpr double kEps = 1e-5;
    const Eigen::Index cols = a->value.cols();
    Mat normalized(a->value.rows(), cols);
    auto inv_std = std::make_shared<Eigen::VectorXd>(a->value.rows());
    for (Eigen::Index i = 0; i < a->value.rows(); ++i) {
        const double mean = a->value.row(i).mean();
        const double var = (a->value.row(i).array() - mean).square().mean();
        const double is = 1.0 / std::sqrt(var + kEps);
        (*inv_std)(i) = is;
        normalized.row(i) = (a->value.row(i).array() - mean) * is;
    }
    auto normalized_copy = std::make_shared<Mat>(normalized);
    Mat v = normalized.array().rowwise() * Eigen::RowVectorXd(gamma->value.row(0)).array();
    v.rowwise() += Eigen::RowVectorXd(beta->value.row(0));
    NodePtr out =
        t.emit(std::move(v), a->requires_grad || gamma->requires_grad || beta->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, gamma, beta, out, normalized_copy, inv_std, cols] {
            const Mat& xhat = *normalized_copy;
            if (gamma->requires_grad) {
                gamma->ensure_grad();
                gamma->grad.row(0) += (out->grad.array() * xhat.array()).colwise().sum().matrix();
            }
            if (beta->requires_grad) {
                beta->ensure_grad();
                beta->grad.row(0) += out->grad.colwise().sum();
            }
            if (a->requires_grad) {
                a->ensure_grad();
                const double n = static_cast<double>(cols);
                using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;
                for (Eigen::Index i = 0; i < out->grad.rows(); ++i) {
                    // dL/dxhat for this row
                    const RowArray dxhat =
                        out->grad.row(i).array() * gamma->value.row(0).array();
                    const RowArray xh = xhat.row(i).array();
                    const double sum_dxhat = dxhat.sum();
                    const double sum_dxhat_xhat = (dxhat * xh).sum();
                    a->grad.row(i).array() +=
                        ((*inv_std)(i) / n) * (n * dxhat - sum_dxhat - xh * sum_dxhat_xhat);
                }
            }
        };
    }
    return out;
}

NodePtr mse_to(Tape& t, const NodePtr& a, const Mat& target) {
    if (a->value.rows() != target.rows() || a->value.cols() != target.cols()) {
        throw InvalidInputError("mse_to: shape mismatch");
    }
    const double n = static_cast<double>(a->value.size());
    Mat diff = a->value - target;
    Mat v(1, 1);
    v(0, 0) = diff.squaredNorm() / n;
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        auto diff_copy = std::make_shared<Mat>(std::move(diff));
        out->backward = [a, out, diff_copy, n] {
            a->ensure_grad();
            a->grad += (2.0 / n) * out->grad(0, 0) * (*diff_copy);
        };
    }
    return out;
}

NodePtr rows_norm_sum(Tape& t, const NodePtr& a) {
    constexpr double kGuard = 1e-12;
    Mat v(1, 1);
    double total = 0.0;
    for (Eigen::Index i = 0; i < a->value.rows(); ++i) total += a->value.row(i).norm();
    v(0, 0) = total;
    NodePtr out = t.emit(std::move(v), a->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, out] {
            a->ensure_grad();
            for (Eigen::Index i = 0; i < a->value.rows(); ++i) {
                const double norm = a->value.row(i).norm();
                if (norm > kGuard) {
                    a->grad.row(i) += out->grad(0, 0) * a->value.row(i) / norm;
                }
            }
        };
    }
    return out;
}

NodePtr add_weighted(Tape& t, const NodePtr& a, double wa, const NodePtr& b, double wb) {
    NodePtr out = t.emit(a->value * wa + b->value * wb, a->requires_grad || b->requires_grad);
    if (out->requires_grad) {
        out->ensure_grad();
        out->backward = [a, wa, b, wb, out] {
            if (a->requires_grad) {
                a->ensure_grad();
                a->grad += out->grad * wa;
            }
            if (b->requires_grad) {
                b->ensure_grad();
                b->grad += out->grad * wb;
            }
        };
    }
    return out;
}

} // namespace asp::model
