#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "planforge/difflab/diffusion.hpp"

namespace planforge::difflab {

// Clean samples with optional per-sample conditioning, one sample per row.
struct Dataset {
    MatrixXd x0;
    MatrixXd cond;  // empty or rows x cond_dim
    MatrixXd ctrl;  // empty or rows x control_dim
};

struct TrainConfig {
    int T = 200;
    ScheduleSpec schedule = LinearBeta{};
    int hidden = 64;
    int depth = 3;
    int time_dim = 16;
    bool lora = false;
    int lora_rank = 4;
    double lora_scale = 4.0;
    bool control = false;
    double control_alpha = 1.0;
    LossConfig loss;
    double learning_rate = 0.01;
    int steps = 1000;
    int batch = 64;
    std::uint64_t seed = 0;
};

struct TrainResult {
    Denoiser net;
    std::vector<double> loss_trace;
};

inline DenoiserConfig denoiser_config(const Dataset& d, const TrainConfig& c) {
    DenoiserConfig dc;
    dc.data_dim = static_cast<int>(d.x0.cols());
    dc.cond_dim = static_cast<int>(d.cond.cols());
    dc.control_dim = static_cast<int>(d.ctrl.cols());
    dc.hidden = c.hidden;
    dc.depth = c.depth;
    dc.time_dim = c.time_dim;
    return dc;
}

// With LoRA or control on, the base W and b stay frozen and only the adapter
// tensors (A, B, Z) move.
inline bool trainable(const std::string& name, const TrainConfig& c) {
    const std::string tail = name.substr(name.find('.') + 1);
    const bool base = tail == "W" || tail == "b";
    if (!c.lora && !c.control) return base;
    if (base) return false;
    if (tail == "A" || tail == "B") return c.lora;
    return c.control;
}

namespace detail {

inline void check_dataset(const Dataset& d) {
    if (d.x0.rows() == 0 || d.x0.cols() == 0) throw Error("EmptyDataset", "training set has no samples");
    if ((d.cond.size() > 0 && d.cond.rows() != d.x0.rows()) || (d.ctrl.size() > 0 && d.ctrl.rows() != d.x0.rows()))
        throw Error("DimensionMismatch", "conditioning rows differ from sample rows");
    if (!d.x0.allFinite() || !d.cond.allFinite() || !d.ctrl.allFinite())
        throw Error("NonFiniteInput", "training set has non-finite entries");
}

inline void check_config(const TrainConfig& c) {
    c.loss.validate();
    if (c.steps < 0 || c.batch < 1 || !(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate))
        throw Error("InvalidConfig", "need steps >= 0, batch >= 1 and a finite positive learning rate");
}

}  // namespace detail

// Plain SGD on lambda1 * MSE(eps_hat, eps) + lambda2 * |LoRA factors|^2, with
// t uniform in 1..T and eps standard normal for every sample of every step.
// `initial` continues from existing weights (adapters are added as configured).
inline TrainResult train(const Dataset& data, const TrainConfig& cfg,
                         std::optional<Denoiser> initial = std::nullopt) {
    detail::check_dataset(data);
    detail::check_config(cfg);
    const NoiseSchedule sched = make_schedule(cfg.T, cfg.schedule);
    std::mt19937_64 rng(cfg.seed);

    TrainResult res;
    if (initial) {
        res.net = std::move(*initial);
        const DenoiserConfig want = denoiser_config(data, cfg);
        if (res.net.cfg.data_dim != want.data_dim || res.net.cfg.cond_dim != want.cond_dim ||
            res.net.cfg.control_dim != want.control_dim)
            throw Error("DimensionMismatch", "initial denoiser does not match the dataset");
    } else {
        res.net = make_denoiser(denoiser_config(data, cfg), rng);
    }
    if (cfg.lora && !res.net.layers.front().lora) enable_lora(res.net, cfg.lora_rank, cfg.lora_scale, rng);
    if (cfg.control && !res.net.layers.front().control) enable_control(res.net, cfg.control_alpha);

    const Eigen::Index n = data.x0.rows();
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::uniform_int_distribution<int> step(1, sched.T);
    std::vector<LayerGrad> grads;
    res.loss_trace.reserve(static_cast<std::size_t>(cfg.steps));
    for (int it = 0; it < cfg.steps; ++it) {
        Batch b;
        b.x.resize(cfg.batch, data.x0.cols());
        b.t.resize(cfg.batch);
        if (data.cond.cols() > 0) b.cond.resize(cfg.batch, data.cond.cols());
        if (data.ctrl.cols() > 0) b.ctrl.resize(cfg.batch, data.ctrl.cols());
        for (int i = 0; i < cfg.batch; ++i) {
            const Eigen::Index k = pick(rng);
            b.x.row(i) = data.x0.row(k);
            b.t[i] = step(rng);
            if (data.cond.cols() > 0) b.cond.row(i) = data.cond.row(k);
            if (data.ctrl.cols() > 0) b.ctrl.row(i) = data.ctrl.row(k);
        }
        const MatrixXd eps = standard_normal(cfg.batch, data.x0.cols(), rng);
        for (int i = 0; i < cfg.batch; ++i) {
            const int t = static_cast<int>(b.t[i]);
            b.x.row(i) = std::sqrt(sched.alpha_bar[t]) * b.x.row(i) + std::sqrt(1.0 - sched.alpha_bar[t]) * eps.row(i);
        }
        const LossParts loss = loss_and_gradients(res.net, b, eps, cfg.loss, grads);
        if (!std::isfinite(loss.total))
            throw Error("NonFiniteLoss", "loss became non-finite at step " + std::to_string(it) +
                                             " (task " + std::to_string(loss.task) + ", reg " +
                                             std::to_string(loss.reg) + "); lower the learning rate");
        res.loss_trace.push_back(loss.total);
        for (std::size_t l = 0; l < res.net.layers.size(); ++l)
            for (auto& tensor : layer_tensors(res.net.layers[l], &grads[l], l))
                if (trainable(tensor.name, cfg)) *tensor.value -= cfg.learning_rate * *tensor.grad;
    }
    return res;
}

struct GradCheckEntry {
    std::string tensor;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t entries = 0;
};

// Compares analytic gradients of every tensor with central differences of the
// loss. Relative error per entry is |a - n| / max(|a|, |n|, 1e-6).
inline std::vector<GradCheckEntry> gradcheck(Denoiser net, const Batch& b, const MatrixXd& eps,
                                             const LossConfig& cfg, double h = 1e-5) {
    std::vector<LayerGrad> grads;
    loss_and_gradients(net, b, eps, cfg, grads);
    auto loss_at = [&]() { return denoiser_loss(net, predict(net, b), eps, cfg).total; };
    std::vector<GradCheckEntry> report;
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        for (auto& tensor : layer_tensors(net.layers[l], &grads[l], l)) {
            GradCheckEntry e;
            e.tensor = tensor.name;
            MatrixXd& p = *tensor.value;
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                const double keep = p.data()[i];
                p.data()[i] = keep + h;
                const double up = loss_at();
                p.data()[i] = keep - h;
                const double down = loss_at();
                p.data()[i] = keep;
                const double numeric = (up - down) / (2.0 * h);
                const double analytic = tensor.grad->data()[i];
                const double abs_err = std::abs(analytic - numeric);
                const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
                e.max_abs_error = std::max(e.max_abs_error, abs_err);
                e.max_rel_error = std::max(e.max_rel_error, abs_err / scale);
                ++e.entries;
            }
            report.push_back(e);
        }
    return report;
}

// Small network with every adapter active and all tensors non-zero, plus a
// fixed batch, for gradient checks.
struct GradCheckFixture {
    Denoiser net;
    Batch batch;
    MatrixXd eps;
    LossConfig loss{1.0, 0.01};
};

inline GradCheckFixture gradcheck_fixture(std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    GradCheckFixture f;
    DenoiserConfig dc;
    dc.data_dim = 2;
    dc.cond_dim = 3;
    dc.control_dim = 2;
    dc.hidden = 6;
    dc.depth = 3;
    dc.time_dim = 4;
    f.net = make_denoiser(dc, rng);
    enable_lora(f.net, 2, 3.0, rng);
    enable_control(f.net, 0.7);
    std::normal_distribution<double> n(0.0, 0.3);
    for (auto& L : f.net.layers) {
        for (Eigen::Index i = 0; i < L.B.size(); ++i) L.B.data()[i] = n(rng);
        for (Eigen::Index i = 0; i < L.b.size(); ++i) L.b.data()[i] = n(rng);
        for (auto& z : L.Z)
            for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n(rng);
    }
    const int rows = 5;
    f.batch.x = standard_normal(rows, dc.data_dim, rng);
    f.batch.t.resize(rows);
    for (int i = 0; i < rows; ++i) f.batch.t[i] = 1 + 37 * i;
    f.batch.cond = standard_normal(rows, dc.cond_dim, rng);
    f.batch.ctrl = standard_normal(rows, dc.control_dim, rng).cwiseAbs();
    f.eps = standard_normal(rows, dc.data_dim, rng);
    return f;
}

}  // namespace planforge::difflab
