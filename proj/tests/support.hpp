#pragma once

// Helpers shared by the unit tests. Everything here is built on <random> and
// Eigen solvers so the oracles stay independent of the library under test.

#include "ope/pomdp.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace support {

inline Eigen::MatrixXd random_stochastic(std::mt19937_64& gen, int n, double zero_prob = 0.2) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r) {
        double total = 0.0;
        for (int c = 0; c < n; ++c) {
            m(r, c) = u(gen) < zero_prob ? 0.0 : u(gen);
            total += m(r, c);
        }
        if (total == 0.0) {
            m(r, r) = total = 1.0;
        }
        m.row(r) /= total;
    }
    return m;
}

inline ope::PomdpModel random_model(std::mt19937_64& gen, int nx, int nh, int na,
                                    bool point_mass = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = nx * nh;
    std::vector<ope::Kernel> kernels;
    for (int a = 0; a < na; ++a) {
        kernels.push_back(random_stochastic(gen, n));
    }
    std::vector<ope::RewardDist> rewards;
    for (int i = 0; i < n * na; ++i) {
        rewards.push_back(point_mass ? ope::RewardDist::point_mass(u(gen))
                                     : ope::RewardDist::gaussian(u(gen), 0.5 + 0.5 * u(gen)));
    }
    return ope::PomdpModel(nx, nh, na, std::move(kernels), std::move(rewards));
}

/// Every action gets at least `floor` mass, so any target is dominated.
inline ope::Policy random_policy(std::mt19937_64& gen, int nx, int na, double floor = 0.05) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd p(nx, na);
    for (int x = 0; x < nx; ++x) {
        double total = 0.0;
        for (int a = 0; a < na; ++a) {
            p(x, a) = u(gen);
            total += p(x, a);
        }
        for (int a = 0; a < na; ++a) {
            p(x, a) = floor + (1.0 - floor * na) * p(x, a) / total;
        }
    }
    return ope::Policy(p);
}

/// Solves d (P - I) = 0, sum(d) = 1 directly.
inline Eigen::RowVectorXd solve_stationary(const Eigen::MatrixXd& P) {
    const Eigen::Index n = P.rows();
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    return A.colPivHouseholderQr().solve(b).transpose();
}

/// Mixture kernel written out by hand, independent of policy_transition_matrix.
inline Eigen::MatrixXd mixture(const ope::PomdpModel& m, const ope::Policy& p) {
    const int n = m.num_states();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < m.num_actions(); ++a) {
            for (int s2 = 0; s2 < n; ++s2) {
                out(s, s2) += p.prob(s / m.num_h(), a) * m.transition(a)(s, s2);
            }
        }
    }
    return out;
}

} // namespace support
