#pragma once

#include "ope/pomdp.hpp"

namespace ope {

/// A finite environment: the model plus the logging and evaluation policies.
struct FiniteEnvironment {
    PomdpModel model;
    Policy behavior;
    Policy target;
};

/**
 * Two-covariate, two-hidden-state toy chain. States ordered (0,0),(0,1),(1,0),(1,1);
 * Y = 0.5 W X H + 0.5 H + 0.1 eps; behavior treats with probability 1/2,
 * target treats iff X = 1.
 */
FiniteEnvironment toy_model();

/// Parameters of the ladder chain used for the lower-bound construction.
struct HardInstanceParams {
    int Q = 1;              // number of hidden states h_1..h_Q
    double delta = 0.5;     // reset probability under treatment
    double Delta = 0.0;     // mean separation at h_Q
    double M1 = 1.0;
    double M2 = 2.0;
    double zeta = 1.0;      // behavior treats with probability exp(-zeta)

    /// delta = 1 - exp(-1/t0).
    static HardInstanceParams from_mixing_time(int Q, double t0, double zeta, double Delta,
                                               double M1, double M2);

    /// Throws ConfigError unless Q >= 1, delta in (0,1), 0 <= Delta <= M1/2, M2 > M1^2, zeta > 0.
    void validate() const;
};

struct HardInstancePair {
    PomdpModel first;   // reward mean M1/2 + Delta at h_Q
    PomdpModel second;  // reward mean M1/2 - Delta at h_Q
    Policy behavior;
    Policy target;      // always treat
};

/**
 * No covariate, Q hidden states. Control resets to h_1; treatment resets to
 * h_1 with probability delta and otherwise climbs to h_{min(j+1, Q)}.
 * Rewards are N(0, M2 - M1^2) off h_Q and N(M1/2 +- Delta, M2 - M1^2) at h_Q.
 */
HardInstancePair hard_instance_pair(const HardInstanceParams& params);

/// Executable admissibility conditions of a hard-instance pair.
struct HardInstanceConditions {
    bool overlap = false;        // pi_a(x) / e_a(x) <= exp(zeta)
    bool mixing = false;         // dobrushin(target kernel) <= exp(-1/t0)
    bool first_moment = false;   // |E[Y | s, a]| <= M1
    bool second_moment = false;  // E[Y^2 | s, a] <= M2

    double max_ratio = 0.0;
    double dobrushin = 0.0;
    double mixing_bound = 0.0;
    double max_abs_mean = 0.0;
    double max_second_moment = 0.0;

    bool all() const noexcept { return overlap && mixing && first_moment && second_moment; }
};

HardInstanceConditions check_hard_instance(const HardInstancePair& pair,
                                           const HardInstanceParams& params, double t0,
                                           double tol = 1e-12);

/// 2 T Delta^2 / (M2 - M1^2) * exp(-(Q - 1)(1/t0 + zeta)).
double kl_bound(const HardInstanceParams& params, std::size_t T, double t0);

struct HardInstanceDesign {
    HardInstanceParams params;
    bool q_clamped = false;  // the Q formula fell below 1 and was clamped
    double q_raw = 1.0;
};

/// (Q, Delta, delta) prescribed for horizon T by the two-point construction.
HardInstanceDesign lower_bound_design(std::size_t T, double t0, double zeta, double M1, double M2);

} // namespace ope
