#include "ope/estimators.hpp"
#include "ope/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace ope {

RatioTrajectory importance_ratios(const Trajectory& traj, const Policy& target,
                                  const Policy& behavior) {
    if (target.num_x() != behavior.num_x() || target.num_actions() != behavior.num_actions()) {
        throw ConfigError("target and behavior policies have different shapes");
    }
    const std::size_t T = traj.length();
    if (traj.x.size() != T || traj.w.size() != T) {
        throw ConfigError("trajectory sequences have different lengths");
    }
    RatioTrajectory out;
    out.ratio.resize(T);
    out.y = traj.y;
    for (std::size_t t = 0; t < T; ++t) {
        const int x = traj.x[t];
        const int a = traj.w[t];
        if (x < 0 || x >= target.num_x() || a < 0 || a >= target.num_actions()) {
            throw ConfigError("trajectory index out of range at t=" + std::to_string(t + 1));
        }
        const double p = target.prob(x, a);
        const double q = behavior.prob(x, a);
        if (p == 0.0) {
            out.ratio[t] = 0.0;
        } else if (q == 0.0) {
            throw OverlapError(t + 1, x, a);
        } else {
            out.ratio[t] = p / q;
        }
    }
    return out;
}

std::vector<RatioTrajectory> importance_ratios(std::span<const Trajectory> trajs,
                                               const Policy& target, const Policy& behavior) {
    std::vector<RatioTrajectory> out;
    out.reserve(trajs.size());
    for (const auto& t : trajs) {
        out.push_back(importance_ratios(t, target, behavior));
    }
    return out;
}

std::size_t usable_length(std::size_t T, int k) {
    if (k < -1) {
        throw ConfigError("window length k must be >= -1");
    }
    if (k <= 0) {
        return T;
    }
    const auto kk = static_cast<std::size_t>(k);
    return T > kk ? T - kk : 0;
}

std::vector<double> window_weights(const RatioTrajectory& traj, int k) {
    const std::size_t T = traj.length();
    if (traj.ratio.size() != T) {
        throw ConfigError("ratio and reward sequences have different lengths");
    }
    const std::size_t m = usable_length(T, k);
    if (m == 0) {
        throw ConfigError("trajectory of length " + std::to_string(T) + " is too short for k=" +
                          std::to_string(k));
    }
    if (k < 0) {
        return std::vector<double>(T, 1.0);
    }
    const auto kk = static_cast<std::size_t>(k);
    double max_log = 0.0;
    for (double r : traj.ratio) {
        if (r > 0.0) {
            max_log = std::max(max_log, std::log(r));
        }
    }
    const bool log_space = static_cast<double>(k) * max_log > 30.0;

    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) {
        // window covers 0-based steps i .. i + k
        if (log_space) {
            double acc = 0.0;
            for (std::size_t s = 0; s <= kk; ++s) {
                acc += std::log(traj.ratio[i + s]);
            }
            w[i] = std::exp(acc);
        } else {
            double acc = 1.0;
            for (std::size_t s = 0; s <= kk; ++s) {
                acc *= traj.ratio[i + s];
            }
            w[i] = acc;
        }
    }
    return w;
}

std::vector<double> weighted_terms(const RatioTrajectory& traj, int k) {
    std::vector<double> w = window_weights(traj, k);
    const std::size_t offset = traj.length() - w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] *= traj.y[offset + i];
    }
    return w;
}

double phiw_estimate(std::span<const RatioTrajectory> trajs, int k) {
    if (trajs.empty()) {
        throw ConfigError("phiw_estimate needs at least one trajectory");
    }
    std::vector<double> unit_means;
    unit_means.reserve(trajs.size());
    for (const auto& traj : trajs) {
        const std::vector<double> terms = weighted_terms(traj, k);
        unit_means.push_back(pairwise_mean(terms));
    }
    return pairwise_mean(unit_means);
}

double phiw_estimate(std::span<const Trajectory> trajs, const Policy& target,
                     const Policy& behavior, int k) {
    const auto ratios = importance_ratios(trajs, target, behavior);
    return phiw_estimate(ratios, k);
}

int rate_optimal_window(std::size_t n, std::size_t T, double t0, double zeta, double C0) {
    if (!(t0 > 0.0) || !(C0 > 0.0) || n * T < 1) {
        throw ConfigError("rate_optimal_window needs t0 > 0, C0 > 0 and n*T >= 1");
    }
    const double raw = t0 / (t0 * zeta + 2.0) *
                       std::log(C0 * static_cast<double>(n) * static_cast<double>(T));
    const double hi = static_cast<double>(T) - 1.0;
    return static_cast<int>(std::clamp(std::round(raw), 0.0, hi));
}

} // namespace ope
