#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "planforge/difflab/denoiser.hpp"
#include "planforge/difflab/schedule.hpp"

namespace planforge::difflab {

inline MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

// One noising step: sqrt(alpha_t) x_{t-1} + sqrt(1 - alpha_t) eps.
inline MatrixXd forward_step(const MatrixXd& x_prev, int t, const NoiseSchedule& s, std::mt19937_64& rng) {
    s.check_step(t);
    const double a = s.alpha[t];
    return std::sqrt(a) * x_prev + std::sqrt(1.0 - a) * standard_normal(x_prev.rows(), x_prev.cols(), rng);
}

// Closed form with caller-supplied noise: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
// t = 0 returns x0.
inline MatrixXd forward_to(const MatrixXd& x0, int t, const NoiseSchedule& s, const MatrixXd& eps) {
    if (t != 0) s.check_step(t);
    if (t == 0) return x0;
    const double ab = s.alpha_bar[t];
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

inline MatrixXd forward_to(const MatrixXd& x0, int t, const NoiseSchedule& s, std::mt19937_64& rng) {
    if (t == 0) return x0;
    return forward_to(x0, t, s, standard_normal(x0.rows(), x0.cols(), rng));
}

// Reverse step in the epsilon parameterization:
//   mu = (x_t - (1 - alpha_t) / sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t)
//   x_{t-1} = mu + sigma_t z,  sigma_t^2 = 1 - alpha_t,  z = 0 at t = 1.
// No noise is drawn at t = 1, so the rng is left untouched there.
inline MatrixXd reverse_step(const MatrixXd& x_t, const MatrixXd& eps_hat, int t, const NoiseSchedule& s,
                             std::mt19937_64& rng) {
    s.check_step(t);
    if (eps_hat.rows() != x_t.rows() || eps_hat.cols() != x_t.cols())
        throw Error("DimensionMismatch", "noise prediction shape differs from x_t");
    const double a = s.alpha[t], ab = s.alpha_bar[t];
    MatrixXd mu = (x_t - ((1.0 - a) / std::sqrt(1.0 - ab)) * eps_hat) / std::sqrt(a);
    if (t == 1) return mu;
    return mu + std::sqrt(1.0 - a) * standard_normal(x_t.rows(), x_t.cols(), rng);
}

// Conditioning shared by every sample of a draw.
struct Condition {
    VectorXd text;      // cond_dim
    VectorXd boundary;  // control_dim
};

inline Batch make_batch(const Denoiser& net, const MatrixXd& x, int t, const Condition& c) {
    Batch b;
    b.x = x;
    b.t = VectorXd::Constant(x.rows(), static_cast<double>(t));
    if (net.cfg.cond_dim > 0) {
        if (c.text.size() != net.cfg.cond_dim) throw Error("DimensionMismatch", "condition width");
        b.cond = c.text.transpose().replicate(x.rows(), 1);
    }
    if (net.cfg.control_dim > 0) {
        if (c.boundary.size() != net.cfg.control_dim) throw Error("DimensionMismatch", "boundary feature width");
        b.ctrl = c.boundary.transpose().replicate(x.rows(), 1);
    }
    return b;
}

inline MatrixXd reverse_step(const MatrixXd& x_t, int t, const Denoiser& net, const Condition& c,
                             const NoiseSchedule& s, std::mt19937_64& rng) {
    return reverse_step(x_t, predict(net, make_batch(net, x_t, t, c)), t, s, rng);
}

// Draws `count` samples: x_T from a standard normal, then reverse steps T..1.
inline MatrixXd sample(const Denoiser& net, const Condition& c, const NoiseSchedule& s, int count,
                       std::mt19937_64& rng) {
    MatrixXd x = standard_normal(count, net.cfg.data_dim, rng);
    for (int t = s.T; t >= 1; --t) x = reverse_step(x, t, net, c, s, rng);
    return x;
}

}  // namespace planforge::difflab
