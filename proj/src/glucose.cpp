#include "ope/glucose.hpp"
#include "ope/rng.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace ope {

int glucose_utility(double gl) noexcept {
    if (gl <= 70.0) {
        return -3;
    }
    if (gl > 150.0) {
        return -2;
    }
    if (gl <= 80.0 || gl > 120.0) {
        return -1;
    }
    return 0;
}

bool glucose_target_rule(double gl, double ex_now, double ex_prev,
                         const GlucoseParams& params) noexcept {
    return gl >= params.rule_gl_threshold && ex_now + ex_prev <= params.rule_ex_threshold;
}

namespace {

struct HourDraw {
    double gl;
    double ex;
    double di;
    int insulin;
    int target_action;
};

class GlucoseStepper {
public:
    GlucoseStepper(const GlucoseParams& params, GlucosePolicy policy, std::uint64_t seed)
        : p_(params), policy_(policy), rng_(seed) {
        state_.gl_prev = p_.gl_init;
    }

    HourDraw step() {
        double ex = 0.0;
        const double u = rng_.uniform();
        if (u < p_.p_mild) {
            ex = rng_.truncated_normal(p_.mild_mean, p_.mild_sd, 0.0);
        } else if (u < p_.p_mild + p_.p_moderate) {
            ex = rng_.truncated_normal(p_.moderate_mean, p_.moderate_sd, 0.0) +
                 rng_.truncated_normal(p_.mild_mean, p_.mild_sd, 0.0);
        }
        double di = 0.0;
        if (rng_.bernoulli(p_.p_diet)) {
            di = rng_.truncated_normal(p_.diet_mean, p_.diet_sd, 0.0);
        }
        const double noise = p_.noise_sd > 0.0 ? rng_.normal(0.0, p_.noise_sd) : 0.0;
        const double gl = 10.0 + 0.9 * state_.gl_prev + 0.1 * state_.di_lag1 + 0.1 * state_.di_lag2 -
                          0.01 * state_.ex_lag1 - 0.01 * state_.ex_lag2 - 2.0 * state_.in_lag1 -
                          4.0 * state_.in_lag2 + noise;

        const int target = glucose_target_rule(gl, ex, state_.ex_lag1, p_) ? 1 : 0;
        int insulin = target;
        if (policy_ == GlucosePolicy::behavior) {
            insulin = rng_.bernoulli(p_.p_insulin) ? 1 : 0;
        }

        state_.gl_prev = gl;
        state_.di_lag2 = state_.di_lag1;
        state_.di_lag1 = di;
        state_.ex_lag2 = state_.ex_lag1;
        state_.ex_lag1 = ex;
        state_.in_lag2 = state_.in_lag1;
        state_.in_lag1 = insulin;
        return {gl, ex, di, insulin, target};
    }

private:
    GlucoseParams p_;
    GlucosePolicy policy_;
    Rng rng_;
    GlucoseState state_;
};

void validate(const GlucoseParams& p) {
    if (!(p.p_insulin >= 0.0 && p.p_insulin < 1.0)) {
        throw ConfigError("insulin probability must lie in [0, 1)");
    }
    const auto is_prob = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!is_prob(p.p_mild) || !is_prob(p.p_moderate) || !is_prob(p.p_diet) ||
        p.p_mild + p.p_moderate > 1.0) {
        throw ConfigError("activity and diet probabilities must lie in [0, 1] with mild + moderate <= 1");
    }
    if (p.mild_sd < 0.0 || p.moderate_sd < 0.0 || p.diet_sd < 0.0 || p.noise_sd < 0.0) {
        throw ConfigError("glucose standard deviations must be nonnegative");
    }
}

} // namespace

GlucoseTrajectory glucose_simulate(std::size_t T, std::size_t burn_in, GlucosePolicy policy,
                                   std::uint64_t seed, const GlucoseParams& params) {
    if (T < 1) {
        throw ConfigError("glucose_simulate needs T >= 1");
    }
    validate(params);
    GlucoseTrajectory traj;
    traj.seed = seed;
    traj.burn_in = burn_in;
    traj.gl.reserve(T);
    traj.ex.reserve(T);
    traj.di.reserve(T);
    traj.insulin.reserve(T);
    traj.y.reserve(T);
    traj.behavior_prob.reserve(T);
    traj.target_action.reserve(T);

    GlucoseStepper stepper(params, policy, seed);
    for (std::size_t hour = 0; hour < burn_in + T; ++hour) {
        const HourDraw d = stepper.step();
        if (hour < burn_in) {
            continue;
        }
        traj.gl.push_back(d.gl);
        traj.ex.push_back(d.ex);
        traj.di.push_back(d.di);
        traj.insulin.push_back(d.insulin);
        traj.y.push_back(glucose_utility(d.gl));
        traj.behavior_prob.push_back(d.insulin == 1 ? params.p_insulin : 1.0 - params.p_insulin);
        traj.target_action.push_back(d.target_action);
    }
    return traj;
}

RatioTrajectory glucose_ratios(const GlucoseTrajectory& traj) {
    RatioTrajectory out;
    out.y = traj.y;
    out.ratio.resize(traj.length());
    for (std::size_t t = 0; t < traj.length(); ++t) {
        if (traj.insulin[t] != traj.target_action[t]) {
            out.ratio[t] = 0.0;
        } else if (traj.behavior_prob[t] <= 0.0) {
            throw OverlapError(t + 1, 0, traj.insulin[t]);
        } else {
            out.ratio[t] = 1.0 / traj.behavior_prob[t];
        }
    }
    return out;
}

namespace {

double run_oracle(std::uint64_t seed, std::size_t hours, const GlucoseParams& params) {
    constexpr std::size_t kWarmup = 1000;
    GlucoseStepper stepper(params, GlucosePolicy::target, seed);
    for (std::size_t i = 0; i < kWarmup; ++i) {
        stepper.step();
    }
    // integer utilities: exact accumulation by category
    long long total = 0;
    for (std::size_t i = 0; i < hours; ++i) {
        total += glucose_utility(stepper.step().gl);
    }
    return static_cast<double>(total) / static_cast<double>(hours);
}

} // namespace

GlucoseOracle glucose_oracle(std::uint64_t seed, std::size_t hours, const GlucoseParams& params) {
    if (hours < 1) {
        throw ConfigError("glucose oracle needs at least one hour");
    }
    validate(params);
    if (!(params == GlucoseParams{})) {
        return {run_oracle(seed, hours, params), seed, hours};
    }
    static std::mutex mutex;
    static std::map<std::pair<std::uint64_t, std::size_t>, double> cache;
    std::lock_guard lock(mutex);
    const auto key = std::make_pair(seed, hours);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, run_oracle(seed, hours, params)).first;
    }
    return {it->second, seed, hours};
}

} // namespace ope
