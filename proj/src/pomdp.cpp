#include "ope/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ope {

namespace {

void check_stochastic_rows(const Eigen::MatrixXd& m, const std::string& what) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double p = m(r, c);
            if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kStochasticTol) {
                throw ConfigError(what + ": entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                  ") is not a probability");
            }
        }
        if (std::abs(m.row(r).sum() - 1.0) > kStochasticTol) {
            throw ConfigError(what + ": row " + std::to_string(r) + " does not sum to 1");
        }
    }
}

} // namespace

PomdpModel::PomdpModel(int num_x, int num_h, int num_actions, std::vector<Kernel> transition,
                       std::vector<RewardDist> reward)
    : num_x_(num_x), num_h_(num_h), num_actions_(num_actions),
      transition_(std::move(transition)), reward_(std::move(reward)) {
    if (num_x_ < 1 || num_h_ < 1) {
        throw ConfigError("num_x and num_h must be at least 1");
    }
    if (num_actions_ < 2) {
        throw ConfigError("num_actions must be at least 2");
    }
    const int n = num_states();
    if (transition_.size() != static_cast<std::size_t>(num_actions_)) {
        throw ConfigError("transition tensor needs one kernel per action");
    }
    for (int a = 0; a < num_actions_; ++a) {
        const Kernel& k = transition_[static_cast<std::size_t>(a)];
        if (k.rows() != n || k.cols() != n) {
            throw ConfigError("transition kernel for action " + std::to_string(a) +
                              " must be " + std::to_string(n) + "x" + std::to_string(n));
        }
        check_stochastic_rows(k, "transition[" + std::to_string(a) + "]");
    }
    if (reward_.size() != static_cast<std::size_t>(n * num_actions_)) {
        throw ConfigError("reward table needs one entry per (state, action)");
    }
    for (const auto& r : reward_) {
        if (!std::isfinite(r.mean) || !std::isfinite(r.sd) || r.sd < 0.0) {
            throw ConfigError("reward sd must be finite and nonnegative");
        }
    }
}

bool PomdpModel::operator==(const PomdpModel& other) const {
    return num_x_ == other.num_x_ && num_h_ == other.num_h_ &&
           num_actions_ == other.num_actions_ && transition_ == other.transition_ &&
           reward_ == other.reward_;
}

Policy::Policy(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
    if (probs_.rows() < 1 || probs_.cols() < 1) {
        throw ConfigError("policy needs at least one covariate row and one action");
    }
    check_stochastic_rows(probs_, "policy");
}

Policy Policy::constant(int num_x, const std::vector<double>& action_probs) {
    Eigen::MatrixXd p(num_x, static_cast<Eigen::Index>(action_probs.size()));
    for (int x = 0; x < num_x; ++x) {
        for (std::size_t a = 0; a < action_probs.size(); ++a) {
            p(x, static_cast<Eigen::Index>(a)) = action_probs[a];
        }
    }
    return Policy(std::move(p));
}

Policy Policy::deterministic(const std::vector<int>& action, int num_actions) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(action.size()), num_actions);
    for (std::size_t x = 0; x < action.size(); ++x) {
        if (action[x] < 0 || action[x] >= num_actions) {
            throw ConfigError("deterministic policy action out of range");
        }
        p(static_cast<Eigen::Index>(x), action[x]) = 1.0;
    }
    return Policy(std::move(p));
}

void check_compatible(const PomdpModel& model, const Policy& policy) {
    if (policy.num_x() != model.num_x() || policy.num_actions() != model.num_actions()) {
        throw ConfigError("policy is " + std::to_string(policy.num_x()) + "x" +
                          std::to_string(policy.num_actions()) + " but the model has num_x=" +
                          std::to_string(model.num_x()) +
                          ", num_actions=" + std::to_string(model.num_actions()));
    }
}

Kernel policy_transition_matrix(const PomdpModel& model, const Policy& policy) {
    check_compatible(model, policy);
    const int n = model.num_states();
    Kernel m = Kernel::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        const int x = model.x_of(s);
        for (int a = 0; a < model.num_actions(); ++a) {
            const double p = policy.prob(x, a);
            if (p != 0.0) {
                m.row(s) += p * model.transition(a).row(s);
            }
        }
    }
    return m;
}

Distribution stationary_distribution(const Kernel& kernel, StationaryOptions options) {
    if (kernel.rows() != kernel.cols() || kernel.rows() == 0) {
        throw ConfigError("stationary_distribution needs a nonempty square kernel");
    }
    if (!(options.tol > 0.0)) {
        throw ConfigError("stationary_distribution tolerance must be positive");
    }
    const Eigen::Index n = kernel.rows();
    Distribution d = Distribution::Constant(n, 1.0 / static_cast<double>(n));
    double residual = 0.0;
    for (std::size_t it = 0; it < options.max_iter; ++it) {
        Distribution next = d * kernel;
        next /= next.sum();
        residual = (next - d).lpNorm<1>();
        d = std::move(next);
        if (residual <= options.tol) {
            const double check = (d * kernel - d).lpNorm<1>();
            if (check <= options.tol) {
                return d;
            }
        }
    }
    throw MixingError(std::vector<double>(d.data(), d.data() + d.size()), residual);
}

Eigen::VectorXd expected_reward_by_state(const PomdpModel& model, const Policy& policy) {
    check_compatible(model, policy);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(model.num_states());
    for (int s = 0; s < model.num_states(); ++s) {
        for (int a = 0; a < model.num_actions(); ++a) {
            r(s) += policy.prob(model.x_of(s), a) * model.reward(s, a).mean;
        }
    }
    return r;
}

double policy_value_exact(const PomdpModel& model, const Policy& policy, StationaryOptions options) {
    const Distribution d = stationary_distribution(policy_transition_matrix(model, policy), options);
    return d.dot(expected_reward_by_state(model, policy));
}

double dobrushin_coefficient(const Kernel& kernel) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < kernel.rows(); ++j) {
            worst = std::max(worst, 0.5 * (kernel.row(i) - kernel.row(j)).lpNorm<1>());
        }
    }
    return std::clamp(worst, 0.0, 1.0);
}

double overlap_zeta(const Policy& target, const Policy& behavior, bool* violated) {
    if (target.num_x() != behavior.num_x() || target.num_actions() != behavior.num_actions()) {
        throw ConfigError("target and behavior policies have different shapes");
    }
    double zeta = 0.0;
    bool bad = false;
    for (int x = 0; x < target.num_x(); ++x) {
        for (int a = 0; a < target.num_actions(); ++a) {
            const double p = target.prob(x, a);
            if (p <= 0.0) {
                continue;
            }
            const double q = behavior.prob(x, a);
            if (q <= 0.0) {
                bad = true;
                continue;
            }
            zeta = std::max(zeta, std::log(p / q));
        }
    }
    if (violated != nullptr) {
        *violated = bad;
    }
    return bad ? std::numeric_limits<double>::infinity() : zeta;
}

MixingOverlapReport mixing_overlap_report(const PomdpModel& model, const Policy& target,
                                          const Policy& behavior) {
    check_compatible(model, behavior);
    MixingOverlapReport report;
    report.dobrushin = dobrushin_coefficient(policy_transition_matrix(model, target));
    if (report.dobrushin <= 0.0) {
        report.mixing_time = 0.0;
    } else if (report.dobrushin >= 1.0) {
        report.mixing_time = std::numeric_limits<double>::infinity();
    } else {
        report.mixing_time = -1.0 / std::log(report.dobrushin);
    }
    report.overlap_zeta = overlap_zeta(target, behavior, &report.overlap_violated);
    return report;
}

} // namespace ope
