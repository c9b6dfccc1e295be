#pragma once

// The two-Gaussian toy run shared by the training suite and the acceptance
// binary: 4096 draws from the mixture, 20000 SGD steps, 10000 samples.

#include <random>

#include "planforge/difflab/toy.hpp"
#include "planforge/difflab/train.hpp"
#include "support/stats.hpp"

namespace toy {

struct Outcome {
    double first_loss = 0.0;  // mean of the first 20 steps
    double last_loss = 0.0;   // mean of the last 500 steps
    double tv = 0.0;
    Eigen::MatrixXd samples;
};

inline planforge::difflab::TrainConfig config() {
    planforge::difflab::TrainConfig c;
    c.learning_rate = 0.05;
    c.steps = 20000;
    c.batch = 128;
    c.seed = 3;
    return c;
}

inline Outcome run(const planforge::difflab::TrainConfig& cfg = config(), int sample_count = 10000) {
    using namespace planforge::difflab;
    const TwoGaussians model;
    std::mt19937_64 data_rng(1);
    Dataset data;
    data.x0 = sample_two_gaussians(model, 4096, data_rng);
    const TrainResult res = train(data, cfg);

    Outcome out;
    std::tie(out.first_loss, out.last_loss) = stats::smoothed_ends(res.loss_trace, 20, 500);
    std::mt19937_64 sample_rng(5);
    out.samples = sample(res.net, Condition{}, make_schedule(cfg.T, cfg.schedule), sample_count, sample_rng);
    out.tv = stats::mixture_tv(out.samples, model.mean, model.sigma);
    return out;
}

}  // namespace toy
