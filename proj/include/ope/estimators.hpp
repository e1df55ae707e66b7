#pragma once

#include "ope/pomdp.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ope {

/**
 * One unit's logged data reduced to what the estimators need: the per-step
 * importance ratio pi_{W_t}(X_t) / e_{W_t}(X_t) and the reward Y_t.
 *
 * Finite-model trajectories are converted with importance_ratios(); other
 * simulators (the glucose model) fill this in directly.
 */
struct RatioTrajectory {
    std::vector<double> ratio;
    std::vector<double> y;

    std::size_t length() const noexcept { return y.size(); }
};

/// Throws OverlapError naming (t, x, a) if the target takes an action the behavior never does.
RatioTrajectory importance_ratios(const Trajectory& traj, const Policy& target,
                                  const Policy& behavior);

std::vector<RatioTrajectory> importance_ratios(std::span<const Trajectory> trajs,
                                               const Policy& target, const Policy& behavior);

/// Number of summands a length-T unit contributes for window k (T for k = -1, else T - k).
std::size_t usable_length(std::size_t T, int k);

/**
 * Window weights prod_{s=0}^{k} ratio_{t-s} for t = k+1..T (1-based).
 * k = -1 yields all-ones weights over the whole trajectory. Products switch to
 * log-space when k * max(log ratio) exceeds 30.
 */
std::vector<double> window_weights(const RatioTrajectory& traj, int k);

/// weights * Y over the usable range.
std::vector<double> weighted_terms(const RatioTrajectory& traj, int k);

/// Partial-history importance-weighted estimate; k = -1 is the plain mean of Y.
double phiw_estimate(std::span<const RatioTrajectory> trajs, int k);
double phiw_estimate(std::span<const Trajectory> trajs, const Policy& target,
                     const Policy& behavior, int k);

/// Parzen-Rosenblatt lag window.
double parzen_kernel(double x) noexcept;

struct HacVariance {
    double value = 0.0;
    /// Raw estimate was negative and has been set to 0.
    bool clamped = false;
};

/**
 * Kernel (HAC) estimate of the long-run variance of the weighted terms,
 * centered at the pooled estimate:
 *   (1/n) sum_i 1/(T_i - k) sum_{t,u} Psi((t - u) / B) Yt~ Yu~
 * evaluated through lags j < B in O(T * B).
 */
HacVariance hac_variance(std::span<const RatioTrajectory> trajs, int k, double bandwidth);
HacVariance hac_variance(std::span<const Trajectory> trajs, const Policy& target,
                         const Policy& behavior, int k, double bandwidth);

/// B_T as a function of the trajectory length.
struct BandwidthRule {
    enum class Kind { power, fixed };

    Kind kind = Kind::power;
    double param = 1.0 / 3.0;

    static BandwidthRule power(double exponent) { return {Kind::power, exponent}; }
    static BandwidthRule fixed(double value) { return {Kind::fixed, value}; }

    double operator()(std::size_t T) const;
};

struct EstimatorConfig {
    int k = 0;
    double alpha = 0.05;
    double bandwidth = 1.0;
};

struct EstimateReport {
    double value = 0.0;
    double variance = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    int k = 0;
    std::size_t n_units = 0;
    std::size_t t_used = 0;
    std::vector<std::string> flags;
};

/// Standard normal quantile.
double normal_quantile(double p);

/**
 * Point estimate, HAC variance and the Gaussian interval
 * value +- z_{1-alpha/2} sqrt(variance / N), N = sum_i (T_i - k).
 */
EstimateReport estimate_with_ci(std::span<const RatioTrajectory> trajs, const EstimatorConfig& config);
EstimateReport estimate_with_ci(std::span<const Trajectory> trajs, const Policy& target,
                                const Policy& behavior, const EstimatorConfig& config);

struct LepskiResult {
    int selected_k = 0;
    std::size_t selected_index = 0;
    std::vector<EstimateReport> reports;  // one per candidate, ascending k
};

/**
 * Backward scan over reports ordered by ascending candidate: intersect the
 * intervals from the largest candidate down; at the first empty intersection
 * return the index just above it, otherwise index 0.
 */
std::size_t lepski_select_index(std::span<const EstimateReport> reports);

/// Candidates must be nonempty and strictly ascending; B_T is the rule at the shortest unit length.
LepskiResult lepski_select(std::span<const RatioTrajectory> trajs, const std::vector<int>& candidates,
                           double alpha, BandwidthRule bandwidth);
LepskiResult lepski_select(std::span<const Trajectory> trajs, const Policy& target,
                           const Policy& behavior, const std::vector<int>& candidates,
                           double alpha, BandwidthRule bandwidth);

/// round(t0 / (t0 * zeta + 2) * ln(C0 * n * T)), clamped to [0, T - 1].
int rate_optimal_window(std::size_t n, std::size_t T, double t0, double zeta, double C0);

} // namespace ope
