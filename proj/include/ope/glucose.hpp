#pragma once

#include "ope/estimators.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ope {

/// Hourly type-1 diabetes simulator constants. Defaults reproduce the published model.
struct GlucoseParams {
    double p_insulin = 0.3;     // behavior policy injection probability
    double p_mild = 0.4;        // activity categories, one categorical draw per hour
    double p_moderate = 0.2;
    double mild_mean = 31.0;
    double mild_sd = 5.0;
    double moderate_mean = 819.0;
    double moderate_sd = 10.0;
    double p_diet = 0.2;
    double diet_mean = 78.0;
    double diet_sd = 10.0;
    double noise_sd = 5.5;
    double gl_init = 100.0;
    double rule_gl_threshold = 110.0;
    double rule_ex_threshold = 100.0;

    bool operator==(const GlucoseParams&) const = default;
};

/// Lagged quantities entering the glucose recursion.
struct GlucoseState {
    double gl_prev = 100.0;
    double di_lag1 = 0.0;
    double di_lag2 = 0.0;
    double ex_lag1 = 0.0;
    double ex_lag2 = 0.0;
    int in_lag1 = 0;
    int in_lag2 = 0;
};

enum class GlucosePolicy { behavior, target };

/// One patient's hourly record. Diet is hidden; glucose and activity are observed.
struct GlucoseTrajectory {
    std::vector<double> gl;
    std::vector<double> ex;
    std::vector<double> di;
    std::vector<int> insulin;
    std::vector<double> y;
    std::vector<double> behavior_prob;  // behavior probability of the realized insulin decision
    std::vector<int> target_action;     // what the target rule would have done
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;

    std::size_t length() const noexcept { return y.size(); }
};

/// -3 hypo (<= 70), -2 hyper (> 150), -1 borderline, 0 normal (80, 120].
int glucose_utility(double gl) noexcept;

/// Inject iff gl >= 110 and ex_now + ex_prev <= 100.
bool glucose_target_rule(double gl, double ex_now, double ex_prev,
                         const GlucoseParams& params = {}) noexcept;

/**
 * Each hour: draw activity and diet, advance glucose
 *   Gl_t = 10 + 0.9 Gl_{t-1} + 0.1 (Di_{t-1} + Di_{t-2}) - 0.01 (Ex_{t-1} + Ex_{t-2})
 *          - 2 In_{t-1} - 4 In_{t-2} + eps,
 * then decide insulin from (Gl_t, Ex_t, Ex_{t-1}) and score Y_t from Gl_t.
 * Starts at gl_init with zero lags; the first burn_in hours are dropped.
 */
GlucoseTrajectory glucose_simulate(std::size_t T, std::size_t burn_in, GlucosePolicy policy,
                                   std::uint64_t seed, const GlucoseParams& params = {});

/// Ratios [In_t == target_t] / behavior_prob_t paired with Y_t.
RatioTrajectory glucose_ratios(const GlucoseTrajectory& traj);

struct GlucoseOracle {
    double value = 0.0;
    std::uint64_t seed = 0;
    std::size_t hours = 0;
};

constexpr std::uint64_t kGlucoseOracleSeed = 0x6c75636f7365ULL;
constexpr std::size_t kGlucoseOracleHours = 10'000'000;

/// Long-run Monte Carlo value of the target rule; cached per (seed, hours) for default params.
GlucoseOracle glucose_oracle(std::uint64_t seed = kGlucoseOracleSeed,
                             std::size_t hours = kGlucoseOracleHours,
                             const GlucoseParams& params = {});

} // namespace ope
