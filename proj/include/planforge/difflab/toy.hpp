#pragma once

#include <Eigen/Dense>

#include <random>

#include "planforge/error.hpp"

namespace planforge::difflab {

// Equal-weight mixture of two 1-D Gaussians at -mean and +mean.
struct TwoGaussians {
    double mean = 2.0;
    double sigma = 0.3;
};

inline Eigen::MatrixXd sample_two_gaussians(const TwoGaussians& m, int count, std::mt19937_64& rng) {
    if (count < 1) throw Error("InvalidParameter", "sample count must be >= 1");
    std::bernoulli_distribution side(0.5);
    std::normal_distribution<double> n(0.0, m.sigma);
    Eigen::MatrixXd x(count, 1);
    for (int i = 0; i < count; ++i) x(i, 0) = (side(rng) ? m.mean : -m.mean) + n(rng);
    return x;
}

}  // namespace planforge::difflab
