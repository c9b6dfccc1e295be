#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "planforge/difflab/adapters.hpp"
#include "planforge/error.hpp"

namespace planforge::difflab {

using Eigen::VectorXd;

// One fully connected layer. The weight can carry a LoRA update and a control
// branch at the same time:
//   y = x W + (r / r') (x A) B + alpha * sum_f c_f (x Z_f) + b
// where c is the per-sample control feature vector.
struct Layer {
    MatrixXd W;
    MatrixXd b;  // 1 x out

    bool lora = false;
    MatrixXd A, B;
    double lora_scale = 1.0;

    bool control = false;
    std::vector<MatrixXd> Z;
    double control_alpha = 1.0;

    Eigen::Index in() const { return W.rows(); }
    Eigen::Index out() const { return W.cols(); }
    double lora_factor() const { return lora_scale / static_cast<double>(A.cols()); }
};

// Gradient of the loss with respect to every tensor of one layer, trainable or not.
struct LayerGrad {
    MatrixXd W, b, A, B;
    std::vector<MatrixXd> Z;
};

inline MatrixXd layer_forward(const Layer& L, const MatrixXd& X, const MatrixXd& C) {
    MatrixXd Y = X * L.W;
    if (L.lora) Y.noalias() += L.lora_factor() * ((X * L.A) * L.B);
    if (L.control)
        for (std::size_t f = 0; f < L.Z.size(); ++f) {
            if (L.Z[f].isZero(0.0)) continue;  // keeps a fresh branch bit-exact
            const MatrixXd Xf = X.array().colwise() * C.col(static_cast<Eigen::Index>(f)).array();
            Y.noalias() += L.control_alpha * (Xf * L.Z[f]);
        }
    Y.rowwise() += L.b.row(0);
    return Y;
}

// Fills `g` and returns dLoss/dX given dLoss/dY.
inline MatrixXd layer_backward(const Layer& L, const MatrixXd& X, const MatrixXd& C, const MatrixXd& dY,
                               LayerGrad& g) {
    g.W = X.transpose() * dY;
    g.b = dY.colwise().sum();
    MatrixXd dX = dY * L.W.transpose();
    if (L.lora) {
        const double s = L.lora_factor();
        const MatrixXd dYBt = dY * L.B.transpose();
        g.B = s * ((X * L.A).transpose() * dY);
        g.A = s * (X.transpose() * dYBt);
        dX.noalias() += s * (dYBt * L.A.transpose());
    }
    if (L.control) {
        g.Z.resize(L.Z.size());
        for (std::size_t f = 0; f < L.Z.size(); ++f) {
            const auto cf = C.col(static_cast<Eigen::Index>(f)).array();
            const MatrixXd Xf = X.array().colwise() * cf;
            g.Z[f] = L.control_alpha * (Xf.transpose() * dY);
            const MatrixXd back = dY * L.Z[f].transpose();
            dX.array() += L.control_alpha * (back.array().colwise() * cf);
        }
    }
    return dX;
}

struct DenoiserConfig {
    int data_dim = 1;
    int cond_dim = 0;     // text-embedding width (0 = unconditional)
    int control_dim = 0;  // boundary-feature width (0 = no control input)
    int hidden = 64;
    int depth = 3;
    int time_dim = 16;
};

// Noise-prediction MLP on [x_t, time embedding, condition] with SiLU between
// layers and a linear output.
struct Denoiser {
    DenoiserConfig cfg;
    std::vector<Layer> layers;

    int input_dim() const { return cfg.data_dim + cfg.time_dim + cfg.cond_dim; }
};

inline void validate(const DenoiserConfig& c) {
    if (c.data_dim < 1 || c.cond_dim < 0 || c.control_dim < 0 || c.hidden < 1 || c.depth < 1 ||
        c.time_dim < 0 || c.time_dim % 2 != 0)
        throw Error("InvalidConfig", "denoiser dimensions must be positive and time_dim even");
}

inline Denoiser make_denoiser(const DenoiserConfig& cfg, std::mt19937_64& rng) {
    validate(cfg);
    Denoiser net;
    net.cfg = cfg;
    int in = net.input_dim();
    for (int l = 0; l < cfg.depth; ++l) {
        const int out = l + 1 == cfg.depth ? cfg.data_dim : cfg.hidden;
        std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
        Layer L;
        L.W.resize(in, out);
        for (Eigen::Index i = 0; i < L.W.size(); ++i) L.W.data()[i] = n(rng);
        L.b = MatrixXd::Zero(1, out);
        net.layers.push_back(std::move(L));
        in = out;
    }
    return net;
}

// Adds LoRA factors to every layer: A random, B zero, so the network is
// unchanged until B moves.
inline void enable_lora(Denoiser& net, int rank, double scale, std::mt19937_64& rng) {
    for (auto& L : net.layers) {
        if (rank < 1 || rank > std::min(L.in(), L.out()))
            throw Error("InvalidConfig", "LoRA rank " + std::to_string(rank) + " does not fit a " +
                                             std::to_string(L.in()) + "x" + std::to_string(L.out()) + " layer");
        std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(L.in())));
        L.lora = true;
        L.lora_scale = scale;
        L.A.resize(L.in(), rank);
        for (Eigen::Index i = 0; i < L.A.size(); ++i) L.A.data()[i] = n(rng);
        L.B = MatrixXd::Zero(rank, L.out());
    }
}

// Adds a zero-initialized control branch to every layer.
inline void enable_control(Denoiser& net, double alpha) {
    if (net.cfg.control_dim < 1) throw Error("InvalidConfig", "control needs control_dim >= 1");
    for (auto& L : net.layers) {
        L.control = true;
        L.control_alpha = alpha;
        L.Z.assign(static_cast<std::size_t>(net.cfg.control_dim), MatrixXd::Zero(L.in(), L.out()));
    }
}

// Sinusoidal embedding of the step index: [sin(t w_k), cos(t w_k)] with
// w_k = 10000^(-k / half).
inline MatrixXd time_embedding(const VectorXd& t, int dim) {
    const int half = dim / 2;
    MatrixXd e(t.size(), dim);
    for (int k = 0; k < half; ++k) {
        const double w = std::exp(-std::log(10000.0) * k / std::max(half, 1));
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            e(i, k) = std::sin(t[i] * w);
            e(i, half + k) = std::cos(t[i] * w);
        }
    }
    return e;
}

inline double silu(double v) { return v / (1.0 + std::exp(-v)); }
inline double silu_grad(double v) {
    const double s = 1.0 / (1.0 + std::exp(-v));
    return s * (1.0 + v * (1.0 - s));
}

// A batch of denoiser inputs, one sample per row.
struct Batch {
    MatrixXd x;     // N x data_dim, the noisy samples x_t
    VectorXd t;     // N step indices
    MatrixXd cond;  // N x cond_dim
    MatrixXd ctrl;  // N x control_dim
};

struct ForwardCache {
    std::vector<MatrixXd> inputs;  // input of each layer
    std::vector<MatrixXd> pre;     // pre-activation of each layer
};

inline void check_batch(const Denoiser& net, const Batch& b) {
    const auto n = b.x.rows();
    if (b.x.cols() != net.cfg.data_dim || b.t.size() != n ||
        (net.cfg.cond_dim > 0 && (b.cond.rows() != n || b.cond.cols() != net.cfg.cond_dim)) ||
        (net.cfg.control_dim > 0 && (b.ctrl.rows() != n || b.ctrl.cols() != net.cfg.control_dim)))
        throw Error("DimensionMismatch", "batch does not match the denoiser dimensions");
}

inline MatrixXd predict(const Denoiser& net, const Batch& b, ForwardCache* cache = nullptr) {
    check_batch(net, b);
    MatrixXd h(b.x.rows(), net.input_dim());
    h.leftCols(net.cfg.data_dim) = b.x;
    h.middleCols(net.cfg.data_dim, net.cfg.time_dim) = time_embedding(b.t, net.cfg.time_dim);
    if (net.cfg.cond_dim > 0) h.rightCols(net.cfg.cond_dim) = b.cond;
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        if (cache) cache->inputs.push_back(h);
        MatrixXd z = layer_forward(net.layers[l], h, b.ctrl);
        const bool last = l + 1 == net.layers.size();
        if (cache) cache->pre.push_back(z);
        h = last ? z : z.unaryExpr(&silu);
    }
    return h;
}

struct LossParts {
    double task = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

// lambda1 * MSE(eps_hat, eps) + lambda2 * sum over layers of |A|^2 + |B|^2.
inline LossParts denoiser_loss(const Denoiser& net, const MatrixXd& eps_hat, const MatrixXd& eps,
                               const LossConfig& cfg) {
    LossParts p;
    p.task = mse(eps_hat, eps);
    for (const auto& L : net.layers)
        if (L.lora) p.reg += L.A.squaredNorm() + L.B.squaredNorm();
    p.total = cfg.lambda1 * p.task + cfg.lambda2 * p.reg;
    return p;
}

// Loss and its gradient with respect to every tensor.
inline LossParts loss_and_gradients(const Denoiser& net, const Batch& b, const MatrixXd& eps,
                                    const LossConfig& cfg, std::vector<LayerGrad>& grads) {
    ForwardCache cache;
    const MatrixXd eps_hat = predict(net, b, &cache);
    const LossParts loss = denoiser_loss(net, eps_hat, eps, cfg);
    grads.assign(net.layers.size(), LayerGrad{});
    MatrixXd d = (2.0 * cfg.lambda1 / static_cast<double>(eps.size())) * (eps_hat - eps);
    for (std::size_t l = net.layers.size(); l-- > 0;) {
        const bool last = l + 1 == net.layers.size();
        if (!last) d.array() *= cache.pre[l].unaryExpr(&silu_grad).array();
        d = layer_backward(net.layers[l], cache.inputs[l], b.ctrl, d, grads[l]);
        const Layer& L = net.layers[l];
        if (L.lora) {
            grads[l].A += 2.0 * cfg.lambda2 * L.A;
            grads[l].B += 2.0 * cfg.lambda2 * L.B;
        }
    }
    return loss;
}

// Names each tensor of a layer for checkpoints and gradient reports.
struct TensorRef {
    std::string name;
    MatrixXd* value;
    const MatrixXd* grad;
};

inline std::vector<TensorRef> layer_tensors(Layer& L, const LayerGrad* g, std::size_t index) {
    const std::string p = "layer" + std::to_string(index) + ".";
    std::vector<TensorRef> out{{p + "W", &L.W, g ? &g->W : nullptr}, {p + "b", &L.b, g ? &g->b : nullptr}};
    if (L.lora) {
        out.push_back({p + "A", &L.A, g ? &g->A : nullptr});
        out.push_back({p + "B", &L.B, g ? &g->B : nullptr});
    }
    if (L.control)
        for (std::size_t f = 0; f < L.Z.size(); ++f)
            out.push_back({p + "Z" + std::to_string(f), &L.Z[f], g ? &g->Z[f] : nullptr});
    return out;
}

}  // namespace planforge::difflab
