#pragma once

#include "ope/errors.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace ope {

using Kernel = Eigen::MatrixXd;       // row-stochastic, rows index the current state
using Distribution = Eigen::RowVectorXd;

/// Conditional law of Y_t given the joint state and the action.
struct RewardDist {
    enum class Kind { gaussian, point_mass };

    Kind kind = Kind::point_mass;
    double mean = 0.0;
    double sd = 0.0;

    static RewardDist gaussian(double mean, double sd) { return {Kind::gaussian, mean, sd}; }
    static RewardDist point_mass(double value) { return {Kind::point_mass, value, 0.0}; }

    bool operator==(const RewardDist&) const = default;
};

/**
 * Finite POMDP on the joint state s = x * num_h + h.
 *
 * The transition tensor holds one row-stochastic |S| x |S| kernel per action;
 * rewards are stored per (s, a). Construction validates every invariant and
 * throws ConfigError on violation, so a live object is always consistent.
 */
class PomdpModel {
public:
    PomdpModel(int num_x, int num_h, int num_actions, std::vector<Kernel> transition,
               std::vector<RewardDist> reward);

    int num_x() const noexcept { return num_x_; }
    int num_h() const noexcept { return num_h_; }
    int num_actions() const noexcept { return num_actions_; }
    int num_states() const noexcept { return num_x_ * num_h_; }

    int state_index(int x, int h) const noexcept { return x * num_h_ + h; }
    int x_of(int s) const noexcept { return s / num_h_; }
    int h_of(int s) const noexcept { return s % num_h_; }

    const Kernel& transition(int a) const { return transition_.at(static_cast<std::size_t>(a)); }
    const std::vector<Kernel>& transitions() const noexcept { return transition_; }

    const RewardDist& reward(int s, int a) const {
        return reward_.at(static_cast<std::size_t>(s * num_actions_ + a));
    }
    const std::vector<RewardDist>& rewards() const noexcept { return reward_; }

    bool operator==(const PomdpModel& other) const;

private:
    int num_x_;
    int num_h_;
    int num_actions_;
    std::vector<Kernel> transition_;
    std::vector<RewardDist> reward_;
};

/// Action probabilities indexed by observed covariate: probs(x, a).
class Policy {
public:
    explicit Policy(Eigen::MatrixXd probs);

    /// Same action distribution for every covariate value.
    static Policy constant(int num_x, const std::vector<double>& action_probs);
    /// Deterministic policy choosing action[x] at covariate x.
    static Policy deterministic(const std::vector<int>& action, int num_actions);

    int num_x() const noexcept { return static_cast<int>(probs_.rows()); }
    int num_actions() const noexcept { return static_cast<int>(probs_.cols()); }
    double prob(int x, int a) const { return probs_(x, a); }
    const Eigen::MatrixXd& probs() const noexcept { return probs_; }

    bool operator==(const Policy& other) const { return probs_ == other.probs_; }

private:
    Eigen::MatrixXd probs_;
};

/// Aligned (X_t, H_t, W_t, Y_t), t = 1..T, recorded after burn-in.
struct Trajectory {
    std::vector<int> x;
    std::vector<int> h;
    std::vector<int> w;
    std::vector<double> y;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;

    std::size_t length() const noexcept { return y.size(); }
};

struct MixingOverlapReport {
    /// Dobrushin coefficient, i.e. the one-step contraction of TV = 1/2 * L1.
    double dobrushin = 0.0;
    /// -1 / ln(dobrushin); 0 for a rank-one kernel, +inf when dobrushin = 1.
    double mixing_time = 0.0;
    /// max ln(pi_a(x) / e_a(x)) over pi_a(x) > 0; +inf on an overlap violation.
    double overlap_zeta = 0.0;
    bool overlap_violated = false;
};

constexpr double kStochasticTol = 1e-12;

struct StationaryOptions {
    double tol = 1e-12;
    std::size_t max_iter = 1'000'000;
};

/// M[s][s'] = sum_a policy(x(s), a) * T[a][s][s'].
Kernel policy_transition_matrix(const PomdpModel& model, const Policy& policy);

/// Power iteration from the uniform distribution until ||dM - d||_1 <= tol.
Distribution stationary_distribution(const Kernel& kernel, StationaryOptions options = {});

/// Expected reward of a joint state under a policy: sum_a policy(x(s), a) * mean(s, a).
Eigen::VectorXd expected_reward_by_state(const PomdpModel& model, const Policy& policy);

/// Stationary mean reward V of the chain run under `policy`.
double policy_value_exact(const PomdpModel& model, const Policy& policy,
                          StationaryOptions options = {});

/// 1/2 max_{s,s'} ||M[s] - M[s']||_1.
double dobrushin_coefficient(const Kernel& kernel);

/// Largest log importance ratio; +inf (and the flag) when the target is not dominated.
MixingOverlapReport mixing_overlap_report(const PomdpModel& model, const Policy& target,
                                          const Policy& behavior);

double overlap_zeta(const Policy& target, const Policy& behavior, bool* violated = nullptr);

/**
 * Run burn_in + T steps from a uniform initial joint state under `behavior`
 * and keep the last T. Per step: W_t ~ behavior(x(S_t)), Y_t ~ reward(S_t, W_t),
 * S_{t+1} ~ T[W_t][S_t]. Bit-identical for identical arguments.
 */
Trajectory simulate(const PomdpModel& model, const Policy& behavior, std::size_t T,
                    std::size_t burn_in, std::uint64_t seed);

void check_compatible(const PomdpModel& model, const Policy& policy);

} // namespace ope
