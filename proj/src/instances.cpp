#include "ope/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ope {

FiniteEnvironment toy_model() {
    Kernel control(4, 4);
    control << 0.3, 0.3, 0.2, 0.2,
               0.2, 0.3, 0.3, 0.2,
               0.2, 0.1, 0.5, 0.2,
               0.2, 0.2, 0.3, 0.3;
    Kernel treated(4, 4);
    treated << 0.75, 0.1, 0.1, 0.05,
               0.25, 0.6, 0.05, 0.1,
               0.05, 0.1, 0.15, 0.7,
               0.05, 0.05, 0.05, 0.85;

    std::vector<RewardDist> reward;
    for (int s = 0; s < 4; ++s) {
        const int x = s / 2;
        const int h = s % 2;
        for (int a = 0; a < 2; ++a) {
            reward.push_back(RewardDist::gaussian(0.5 * a * x * h + 0.5 * h, 0.1));
        }
    }
    PomdpModel model(2, 2, 2, {control, treated}, std::move(reward));
    return FiniteEnvironment{std::move(model), Policy::constant(2, {0.5, 0.5}),
                             Policy::deterministic({0, 1}, 2)};
}

HardInstanceParams HardInstanceParams::from_mixing_time(int Q, double t0, double zeta,
                                                        double Delta, double M1, double M2) {
    if (!(t0 > 0.0)) {
        throw ConfigError("mixing time t0 must be positive");
    }
    HardInstanceParams p;
    p.Q = Q;
    p.delta = -std::expm1(-1.0 / t0);
    p.Delta = Delta;
    p.M1 = M1;
    p.M2 = M2;
    p.zeta = zeta;
    p.validate();
    return p;
}

void HardInstanceParams::validate() const {
    if (Q < 1) {
        throw ConfigError("hard instance needs Q >= 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ConfigError("reset probability delta must lie in (0, 1)");
    }
    if (!(M2 > M1 * M1)) {
        throw ConfigError("hard instance needs M2 > M1^2");
    }
    if (!(Delta >= 0.0 && Delta <= M1 / 2.0)) {
        throw ConfigError("hard instance needs 0 <= Delta <= M1/2");
    }
    if (!(zeta > 0.0)) {
        throw ConfigError("overlap zeta must be positive");
    }
}

namespace {

PomdpModel ladder_model(const HardInstanceParams& p, double top_mean) {
    const int Q = p.Q;
    Kernel control = Kernel::Zero(Q, Q);
    Kernel treated = Kernel::Zero(Q, Q);
    for (int j = 0; j < Q; ++j) {
        control(j, 0) = 1.0;
        treated(j, 0) += p.delta;
        treated(j, std::min(j + 1, Q - 1)) += 1.0 - p.delta;
    }
    const double sd = std::sqrt(p.M2 - p.M1 * p.M1);
    std::vector<RewardDist> reward;
    for (int j = 0; j < Q; ++j) {
        const double mean = j == Q - 1 ? top_mean : 0.0;
        reward.push_back(RewardDist::gaussian(mean, sd));
        reward.push_back(RewardDist::gaussian(mean, sd));
    }
    return PomdpModel(1, Q, 2, {control, treated}, std::move(reward));
}

} // namespace

HardInstancePair hard_instance_pair(const HardInstanceParams& params) {
    params.validate();
    const double treat = std::exp(-params.zeta);
    return HardInstancePair{ladder_model(params, params.M1 / 2.0 + params.Delta),
                            ladder_model(params, params.M1 / 2.0 - params.Delta),
                            Policy::constant(1, {1.0 - treat, treat}),
                            Policy::constant(1, {0.0, 1.0})};
}

HardInstanceConditions check_hard_instance(const HardInstancePair& pair,
                                           const HardInstanceParams& params, double t0,
                                           double tol) {
    HardInstanceConditions c;
    for (int x = 0; x < pair.target.num_x(); ++x) {
        for (int a = 0; a < pair.target.num_actions(); ++a) {
            const double p = pair.target.prob(x, a);
            if (p <= 0.0) {
                continue;
            }
            const double q = pair.behavior.prob(x, a);
            c.max_ratio = std::max(c.max_ratio, q > 0.0 ? p / q : std::numeric_limits<double>::infinity());
        }
    }
    c.overlap = c.max_ratio <= std::exp(params.zeta) * (1.0 + tol);

    c.mixing_bound = std::exp(-1.0 / t0);
    for (const PomdpModel* m : {&pair.first, &pair.second}) {
        c.dobrushin = std::max(c.dobrushin,
                               dobrushin_coefficient(policy_transition_matrix(*m, pair.target)));
        for (const auto& r : m->rewards()) {
            c.max_abs_mean = std::max(c.max_abs_mean, std::abs(r.mean));
            c.max_second_moment = std::max(c.max_second_moment, r.mean * r.mean + r.sd * r.sd);
        }
    }
    c.mixing = c.dobrushin <= c.mixing_bound + tol;
    c.first_moment = c.max_abs_mean <= params.M1 + tol;
    c.second_moment = c.max_second_moment <= params.M2 + tol;
    return c;
}

double kl_bound(const HardInstanceParams& params, std::size_t T, double t0) {
    if (!(params.M2 > params.M1 * params.M1)) {
        throw ConfigError("kl_bound needs M2 > M1^2");
    }
    if (!(t0 > 0.0)) {
        throw ConfigError("mixing time t0 must be positive");
    }
    const double var = params.M2 - params.M1 * params.M1;
    return 2.0 * static_cast<double>(T) * params.Delta * params.Delta / var *
           std::exp(-(params.Q - 1) * (1.0 / t0 + params.zeta));
}

HardInstanceDesign lower_bound_design(std::size_t T, double t0, double zeta, double M1, double M2) {
    if (T < 1 || !(t0 > 0.0) || !(zeta > 0.0) || !(M1 > 0.0) || !(M2 > M1 * M1)) {
        throw ConfigError("lower_bound_design needs T >= 1, t0, zeta, M1 > 0 and M2 > M1^2");
    }
    HardInstanceDesign design;
    const double var = M2 - M1 * M1;
    if (t0 * zeta > 1.0) {
        const double arg = M1 * M1 * static_cast<double>(T) / (2.0 * M2 - M1 * M1);
        design.q_raw = t0 / (t0 * zeta + 1.0) * std::log(arg) + 1.0;
    } else {
        design.q_raw = 1.0;
    }
    int Q = 1;
    if (!(design.q_raw >= 1.0)) {
        design.q_clamped = true;
    } else {
        Q = std::max(1, static_cast<int>(std::lround(design.q_raw)));
    }
    const double Delta = std::min(std::sqrt(var / (2.0 * static_cast<double>(T))) *
                                      std::exp((Q - 1) * (t0 * zeta + 1.0) / (2.0 * t0)),
                                  M1 / 2.0);
    design.params = HardInstanceParams::from_mixing_time(Q, t0, zeta, Delta, M1, M2);
    return design;
}

} // namespace ope
