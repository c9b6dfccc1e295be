#pragma once

#include <string>
#include <variant>
#include <vector>

#include "planforge/error.hpp"

namespace planforge::difflab {

// alpha[t] and alpha_bar[t] are 1-indexed; index 0 holds the t = 0 convention
// alpha_bar[0] = 1 (alpha[0] is unused and also 1).
struct NoiseSchedule {
    int T = 0;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;

    void check_step(int t) const {
        if (t < 1 || t > T)
            throw Error("InvalidParameter", "step " + std::to_string(t) + " outside 1.." + std::to_string(T));
    }
};

// beta_t linear from beta_start (t = 1) to beta_end (t = T), alpha_t = 1 - beta_t.
struct LinearBeta {
    double beta_start = 1e-3;
    double beta_end = 0.05;
};

struct ConstantAlpha {
    double alpha = 0.9;
};

using ScheduleSpec = std::variant<LinearBeta, ConstantAlpha>;

inline NoiseSchedule make_schedule(int T, const ScheduleSpec& spec = LinearBeta{}) {
    if (T < 1) throw Error("InvalidSpec", "T must be >= 1, got " + std::to_string(T));
    NoiseSchedule s;
    s.T = T;
    s.alpha.assign(static_cast<std::size_t>(T) + 1, 1.0);
    s.alpha_bar.assign(static_cast<std::size_t>(T) + 1, 1.0);
    for (int t = 1; t <= T; ++t) {
        double a;
        if (const auto* lin = std::get_if<LinearBeta>(&spec)) {
            const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / (T - 1);
            a = 1.0 - (lin->beta_start + frac * (lin->beta_end - lin->beta_start));
        } else {
            a = std::get<ConstantAlpha>(spec).alpha;
        }
        if (!(a > 0.0 && a < 1.0))
            throw Error("InvalidSpec", "alpha_" + std::to_string(t) + " = " + std::to_string(a) +
                                           " is outside (0, 1)");
        s.alpha[t] = a;
        s.alpha_bar[t] = s.alpha_bar[t - 1] * a;
    }
    return s;
}

}  // namespace planforge::difflab
