#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <vector>

#include "planforge/error.hpp"

namespace planforge::difflab {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;

// Low-rank update of a frozen d x k weight: y = x (W' + (r / r') A B) + b,
// with A d x r' and B r' x k. Inputs are row vectors (one sample per row).
struct LoRAAdapter {
    MatrixXd base;     // W'
    MatrixXd down;     // A
    MatrixXd up;       // B
    double scale = 1;  // r
    RowVectorXd bias;  // b

    Eigen::Index rank() const { return down.cols(); }
};

inline void check_lora(const LoRAAdapter& ad) {
    const auto d = ad.base.rows(), k = ad.base.cols();
    if (ad.down.rows() != d || ad.up.cols() != k || ad.up.rows() != ad.rank() || ad.bias.size() != k)
        throw Error("DimensionMismatch", "LoRA factors do not fit the base weight");
    if (ad.rank() < 1 || ad.rank() > std::min(d, k))
        throw Error("InvalidParameter", "LoRA rank must be in 1..min(d, k)");
}

// Factored evaluation; never forms the d x k update.
inline MatrixXd lora_forward(const MatrixXd& x, const LoRAAdapter& ad) {
    check_lora(ad);
    if (x.cols() != ad.base.rows()) throw Error("DimensionMismatch", "input width does not match W'");
    MatrixXd y = x * ad.base;
    y.noalias() += (ad.scale / static_cast<double>(ad.rank())) * ((x * ad.down) * ad.up);
    y.rowwise() += ad.bias;
    return y;
}

// W' + (r / r') A B.
inline MatrixXd lora_dense(const LoRAAdapter& ad) {
    check_lora(ad);
    return ad.base + (ad.scale / static_cast<double>(ad.rank())) * (ad.down * ad.up);
}

// Control branch: effective weight W + alpha * ZeroConv(c), where ZeroConv is
// the linear map c -> sum_f c_f Z_f from boundary features to weight deltas.
// Every Z_f starts at zero.
struct ControlBranch {
    MatrixXd base;              // W, d x k
    std::vector<MatrixXd> zero; // Z_f, each d x k
    double alpha = 1.0;
    RowVectorXd bias;
};

inline ControlBranch make_control_branch(MatrixXd base, int features, double alpha = 1.0) {
    ControlBranch br;
    br.zero.assign(static_cast<std::size_t>(features), MatrixXd::Zero(base.rows(), base.cols()));
    br.bias = RowVectorXd::Zero(base.cols());
    br.alpha = alpha;
    br.base = std::move(base);
    return br;
}

inline void check_control(const ControlBranch& br, const Eigen::VectorXd& c) {
    if (static_cast<std::size_t>(c.size()) != br.zero.size())
        throw Error("DimensionMismatch", "control feature count does not match the branch");
    for (const auto& z : br.zero)
        if (z.rows() != br.base.rows() || z.cols() != br.base.cols())
            throw Error("DimensionMismatch", "zero-conv weight does not match W");
    if (br.bias.size() != br.base.cols()) throw Error("DimensionMismatch", "bias width does not match W");
}

// W + alpha * sum_f c_f Z_f.
inline MatrixXd control_dense(const ControlBranch& br, const Eigen::VectorXd& c) {
    check_control(br, c);
    MatrixXd w = br.base;
    for (std::size_t f = 0; f < br.zero.size(); ++f) w += (br.alpha * c[static_cast<Eigen::Index>(f)]) * br.zero[f];
    return w;
}

// x W + alpha * sum_f c_f (x Z_f) + b; the base product is computed on its own
// so a zero branch reproduces the base pass exactly.
inline MatrixXd control_forward(const MatrixXd& x, const ControlBranch& br, const Eigen::VectorXd& c) {
    check_control(br, c);
    if (x.cols() != br.base.rows()) throw Error("DimensionMismatch", "input width does not match W");
    MatrixXd y = x * br.base;
    for (std::size_t f = 0; f < br.zero.size(); ++f) {
        const double s = br.alpha * c[static_cast<Eigen::Index>(f)];
        if (s != 0.0 && !br.zero[f].isZero(0.0)) y.noalias() += s * (x * br.zero[f]);
    }
    y.rowwise() += br.bias;
    return y;
}

struct LossConfig {
    double lambda1 = 1.0;  // task (mean squared error)
    double lambda2 = 0.0;  // squared Frobenius norm of the LoRA factors

    void validate() const {
        if (!(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1 + lambda2 > 0.0))
            throw Error("InvalidParameter", "need lambda1, lambda2 >= 0 with a positive sum");
    }
};

inline double mse(const MatrixXd& y_hat, const MatrixXd& y) {
    if (y_hat.rows() != y.rows() || y_hat.cols() != y.cols())
        throw Error("DimensionMismatch", "prediction and target shapes differ");
    if (y.size() == 0) return 0.0;
    return (y_hat - y).squaredNorm() / static_cast<double>(y.size());
}

// lambda1 * MSE(y_hat, y) + lambda2 * (|A|_F^2 + |B|_F^2).
inline double lora_loss(const MatrixXd& y_hat, const MatrixXd& y, const LoRAAdapter& ad,
                        const LossConfig& cfg) {
    cfg.validate();
    return cfg.lambda1 * mse(y_hat, y) + cfg.lambda2 * (ad.down.squaredNorm() + ad.up.squaredNorm());
}

}  // namespace planforge::difflab
