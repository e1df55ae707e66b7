#include "ope/estimators.hpp"

#include <algorithm>
#include <limits>

namespace ope {

std::size_t lepski_select_index(std::span<const EstimateReport> reports) {
    if (reports.empty()) {
        throw ConfigError("lepski selection needs at least one candidate");
    }
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = reports.size(); i-- > 0;) {
        lo = std::max(lo, reports[i].ci_lo);
        hi = std::min(hi, reports[i].ci_hi);
        if (lo > hi) {
            return i + 1;
        }
    }
    return 0;
}

LepskiResult lepski_select(std::span<const RatioTrajectory> trajs, const std::vector<int>& candidates,
                           double alpha, BandwidthRule bandwidth) {
    if (candidates.empty()) {
        throw ConfigError("lepski selection needs at least one candidate");
    }
    if (!std::is_sorted(candidates.begin(), candidates.end()) ||
        std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end()) {
        throw ConfigError("lepski candidates must be strictly ascending");
    }
    if (trajs.empty()) {
        throw ConfigError("lepski selection needs at least one trajectory");
    }
    std::size_t shortest = trajs.front().length();
    for (const auto& t : trajs) {
        shortest = std::min(shortest, t.length());
    }
    EstimatorConfig config;
    config.alpha = alpha;
    config.bandwidth = bandwidth(shortest);

    LepskiResult result;
    result.reports.reserve(candidates.size());
    for (int k : candidates) {
        config.k = k;
        result.reports.push_back(estimate_with_ci(trajs, config));
    }
    result.selected_index = lepski_select_index(result.reports);
    result.selected_k = candidates[result.selected_index];
    return result;
}

LepskiResult lepski_select(std::span<const Trajectory> trajs, const Policy& target,
                           const Policy& behavior, const std::vector<int>& candidates,
                           double alpha, BandwidthRule bandwidth) {
    const auto ratios = importance_ratios(trajs, target, behavior);
    return lepski_select(ratios, candidates, alpha, bandwidth);
}

} // namespace ope
