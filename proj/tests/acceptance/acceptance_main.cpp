// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "ope/estimators.hpp"
#include "ope/glucose.hpp"
#include "ope/harness.hpp"
#include "ope/instances.hpp"
#include "ope/io.hpp"
#include "ope/numeric.hpp"
#include "ope/rng.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace ope;

namespace {

// Tolerances and budgets.
constexpr double kOracleTol = 0.005;
constexpr double kEnumTol = 1e-10;
constexpr double kStationaryTol = 1e-10;
constexpr double kKlTol = 1e-12;
constexpr double kBaselineFactor = 1.5;
constexpr double kZ95 = 1.959963984540054;
constexpr double kHacRelTol = 0.15;

constexpr double kBudget1 = 1.0;
constexpr double kBudget2 = 1.0;
constexpr double kBudget3 = 5.0;
constexpr double kBudget4 = 120.0;
constexpr double kBudget6 = 120.0;
constexpr double kBudget7 = 300.0;
constexpr double kBudget8 = 5.0;
constexpr double kBudget9 = 600.0;

// OPE_ACCEPTANCE_SEED replaces the master seed for robustness reruns.
const std::uint64_t kSeed = [] {
    const char* env = std::getenv("OPE_ACCEPTANCE_SEED");
    return env != nullptr ? std::strtoull(env, nullptr, 0) : 0x5eed2024ULL;
}();

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail, double seconds) {
    std::printf("%s  criterion %2d: %s  [%s; %.2f s]\n", ok ? "PASS" : "FAIL", id, what.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) {
        ++failures;
    }
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Eigen::MatrixXd mixture(const PomdpModel& m, const Policy& p) {
    const int n = m.num_states();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < m.num_actions(); ++a) {
            out.row(s) += p.prob(m.x_of(s), a) * m.transition(a).row(s);
        }
    }
    return out;
}

Eigen::RowVectorXd solve_stationary(const Eigen::MatrixXd& P) {
    const Eigen::Index n = P.rows();
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    return A.colPivHouseholderQr().solve(b).transpose();
}

Eigen::MatrixXd random_stochastic(std::mt19937_64& gen, int n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            m(r, c) = u(gen);
        }
        m.row(r) /= m.row(r).sum();
    }
    return m;
}

PomdpModel random_model(std::mt19937_64& gen, int nx, int nh, bool point_mass) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Kernel> k{random_stochastic(gen, nx * nh), random_stochastic(gen, nx * nh)};
    std::vector<RewardDist> r;
    for (int i = 0; i < nx * nh * 2; ++i) {
        r.push_back(point_mass ? RewardDist::point_mass(u(gen)) : RewardDist::gaussian(u(gen), 1.0));
    }
    return PomdpModel(nx, nh, 2, std::move(k), std::move(r));
}

Policy random_policy(std::mt19937_64& gen, int nx) {
    std::uniform_real_distribution<double> u(0.1, 0.9);
    Eigen::MatrixXd p(nx, 2);
    for (int x = 0; x < nx; ++x) {
        p(x, 0) = u(gen);
        p(x, 1) = 1.0 - p(x, 0);
    }
    return Policy(p);
}

struct Shape {
    bool u = false;       // U-shaped up to paired Monte Carlo error
    bool strict = false;  // every step monotone in the raw MSE values
    std::size_t argmin = 0;
    int kmin = 0;
};

// Mean and standard error of the paired squared-error difference b - a.
std::pair<double, double> paired_change(const SweepCell& a, const SweepCell& b, double truth) {
    std::vector<double> d;
    for (std::size_t r = 0; r < a.estimates.size(); ++r) {
        const double ea = a.estimates[r] - truth;
        const double eb = b.estimates[r] - truth;
        d.push_back(eb * eb - ea * ea);
    }
    const double mean = pairwise_mean(d);
    std::vector<double> sq;
    for (double v : d) {
        sq.push_back((v - mean) * (v - mean));
    }
    const double n = static_cast<double>(d.size());
    return {mean, std::sqrt(pairwise_sum(sq) / (n - 1.0) / n)};
}

// Interior argmin; no step significantly against the U; both ends significantly above the minimum.
Shape mse_shape(const SweepResult& r, std::size_t T) {
    const std::vector<int>& ks = r.spec.k_values;
    const double truth = r.oracle.value;
    Shape s;
    for (std::size_t i = 1; i < ks.size(); ++i) {
        if (r.cell(ks[i], T).mse < r.cell(ks[s.argmin], T).mse) {
            s.argmin = i;
        }
    }
    s.kmin = ks[s.argmin];
    if (s.argmin == 0 || s.argmin + 1 == ks.size()) {
        return s;
    }
    s.u = true;
    s.strict = true;
    for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
        const auto [step, se] = paired_change(r.cell(ks[i], T), r.cell(ks[i + 1], T), truth);
        const bool descending = i < s.argmin;
        if (descending ? step > 0.0 : step < 0.0) {
            s.strict = false;
        }
        if (descending ? step > kZ95 * se : step < -kZ95 * se) {
            s.u = false;
        }
    }
    const SweepCell& lo = r.cell(s.kmin, T);
    for (int end : {ks.front(), ks.back()}) {
        const auto [rise, se] = paired_change(lo, r.cell(end, T), truth);
        s.u = s.u && rise > kZ95 * se;
    }
    return s;
}

std::vector<double> mse_curve(const SweepResult& r, std::size_t T) {
    std::vector<double> out;
    for (int k : r.spec.k_values) {
        out.push_back(r.cell(k, T).mse);
    }
    return out;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream os;
    write_sweep_csv(os, r);
    return os.str();
}

void criterion1() {
    Stopwatch sw;
    const auto toy = toy_model();
    const Distribution de = stationary_distribution(policy_transition_matrix(toy.model, toy.behavior));
    const Distribution dp = stationary_distribution(policy_transition_matrix(toy.model, toy.target));
    const double de_ref[] = {0.24, 0.20, 0.20, 0.35};
    const double dp_ref[] = {0.09, 0.10, 0.10, 0.71};
    double worst = 0.0;
    for (int s = 0; s < 4; ++s) {
        worst = std::max({worst, std::abs(de(s) - de_ref[s]), std::abs(dp(s) - dp_ref[s])});
    }
    const double ve = policy_value_exact(toy.model, toy.behavior);
    const double vp = policy_value_exact(toy.model, toy.target);
    worst = std::max({worst, std::abs(ve - 0.37), std::abs(vp - 0.76)});
    const double t = sw.seconds();
    report(1, worst <= kOracleTol && t < kBudget1, "toy stationary laws and exact values",
           "V(e)=" + fmt("%.4f", ve) + " V(pi)=" + fmt("%.4f", vp) + " max dev " + fmt("%.4f", worst), t);
}

void criterion2() {
    Stopwatch sw;
    std::mt19937_64 gen(kSeed);
    const PomdpModel m = random_model(gen, 2, 2, true);
    const Policy e = random_policy(gen, 2);
    const Policy pi = random_policy(gen, 2);
    const std::size_t T = 3;
    const int k = 1;
    const Eigen::RowVectorXd de = solve_stationary(mixture(m, e));

    Trajectory traj;
    traj.x.resize(T);
    traj.h.resize(T);
    traj.w.resize(T);
    traj.y.resize(T);
    double expectation = 0.0;
    std::function<void(std::size_t, int, double)> walk = [&](std::size_t t, int s, double p) {
        for (int a = 0; a < 2; ++a) {
            const double pa = p * e.prob(m.x_of(s), a);
            traj.x[t] = m.x_of(s);
            traj.h[t] = m.h_of(s);
            traj.w[t] = a;
            traj.y[t] = m.reward(s, a).mean;
            if (t + 1 == T) {
                expectation += pa * phiw_estimate(std::span<const Trajectory>(&traj, 1), pi, e, k);
                continue;
            }
            for (int s2 = 0; s2 < m.num_states(); ++s2) {
                walk(t + 1, s2, pa * m.transition(a)(s, s2));
            }
        }
    };
    for (int s = 0; s < m.num_states(); ++s) {
        walk(0, s, de(s));
    }

    const Eigen::RowVectorXd pushed = de * mixture(m, pi);
    double target = 0.0;
    for (int s = 0; s < m.num_states(); ++s) {
        for (int a = 0; a < 2; ++a) {
            target += pushed(s) * pi.prob(m.x_of(s), a) * m.reward(s, a).mean;
        }
    }
    const double err = std::abs(expectation - target);
    const double t = sw.seconds();
    report(2, err <= kEnumTol && t < kBudget2, "exact enumeration matches the one-step pushforward",
           "E=" + fmt("%.12f", expectation) + " target=" + fmt("%.12f", target) + " err " + fmt("%.1e", err), t);
}

void criterion3() {
    Stopwatch sw;
    std::mt19937_64 gen(kSeed + 3);
    std::size_t mismatches = 0;
    std::size_t checks = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const PomdpModel m = random_model(gen, 2, 3, false);
        const Policy e = random_policy(gen, 2);
        const Trajectory traj = simulate(m, e, 200, 20, gen());
        for (int k : {0, 1, 2, 5}) {
            const std::span<const double> tail(traj.y.data() + k, traj.y.size() - static_cast<std::size_t>(k));
            ++checks;
            if (phiw_estimate(std::span<const Trajectory>(&traj, 1), e, e, k) != pairwise_mean(tail)) {
                ++mismatches;
            }
        }
    }
    const double t = sw.seconds();
    report(3, mismatches == 0 && t < kBudget3, "identical policies collapse to the trailing mean",
           std::to_string(checks - mismatches) + "/" + std::to_string(checks) + " exact", t);
}

SweepResult toy_sweep() {
    SweepSpec spec;
    spec.env = "toy";
    spec.k_values = {-1, 0, 1, 2, 3, 4, 5};
    spec.T_values = {200, 600, 1400};
    spec.replications = 2000;
    spec.master_seed = kSeed + 4;
    return run_sweep(spec);
}

void criteria4and5() {
    Stopwatch sw;
    const SweepResult r = toy_sweep();
    const double t = sw.seconds();

    bool ok4 = t < kBudget4;
    std::string detail4;
    for (std::size_t T : r.spec.T_values) {
        const Shape sh = mse_shape(r, T);
        ok4 = ok4 && sh.u && (sh.kmin == 1 || sh.kmin == 2);
        detail4 += "T=" + std::to_string(T) + " argmin k=" + std::to_string(sh.kmin) +
                   (sh.u ? " U" : " not U") + (sh.strict ? " (strict); " : " (not strict); ");
    }
    {
        const double best = r.cell(mse_shape(r, 1400).kmin, 1400).mse;
        const double f_m1 = r.cell(-1, 1400).mse / best;
        const double f_0 = r.cell(0, 1400).mse / best;
        ok4 = ok4 && f_m1 >= kBaselineFactor && f_0 >= kBaselineFactor;
        detail4 += "MSE ratios at 1400: k=-1 " + fmt("%.2f", f_m1) + "x, k=0 " + fmt("%.2f", f_0) + "x";
    }
    report(4, ok4, "toy MSE is U-shaped in k with argmin in {1,2}", detail4, t);

    // Bias intervals bias +- z sqrt(var / R) overlap pairwise across T for every k.
    bool overlap = true;
    std::string worst_k;
    for (int k : r.spec.k_values) {
        for (std::size_t a = 0; a < r.spec.T_values.size(); ++a) {
            for (std::size_t b = a + 1; b < r.spec.T_values.size(); ++b) {
                const SweepCell& ca = r.cell(k, r.spec.T_values[a]);
                const SweepCell& cb = r.cell(k, r.spec.T_values[b]);
                const double ha = kZ95 * std::sqrt(ca.variance / static_cast<double>(ca.n_replications));
                const double hb = kZ95 * std::sqrt(cb.variance / static_cast<double>(cb.n_replications));
                if (std::abs(ca.bias - cb.bias) > ha + hb) {
                    overlap = false;
                    worst_k += " k=" + std::to_string(k);
                }
            }
        }
    }
    const double v200 = r.cell(5, 200).variance;
    const double v600 = r.cell(5, 600).variance;
    const double v1400 = r.cell(5, 1400).variance;
    const bool decreasing = v200 > v600 && v600 > v1400;
    report(5, overlap && decreasing, "bias flat in T, variance at k=5 decreasing",
           std::string(overlap ? "bias intervals overlap for every k" : "bias intervals disjoint at" + worst_k) +
               "; var(k=5) " + fmt("%.4f", v200) + " > " + fmt("%.4f", v600) + " > " + fmt("%.4f", v1400),
           t);
}

void criterion6() {
    Stopwatch sw;
    const auto toy = toy_model();
    const std::size_t T = 10000;
    const int k = 1;
    const double B = BandwidthRule::power(1.0 / 3.0)(T);
    std::vector<double> estimates;
    std::vector<double> hac;
    for (std::size_t r = 0; r < 5000; ++r) {
        const Trajectory traj = simulate(toy.model, toy.behavior, T, 100, stream_seed(kSeed + 6, r));
        const RatioTrajectory u = importance_ratios(traj, toy.target, toy.behavior);
        const std::span<const RatioTrajectory> one(&u, 1);
        estimates.push_back(phiw_estimate(one, k));
        if (r < 500) {
            hac.push_back(hac_variance(one, k, B).value);
        }
    }
    const double mean = pairwise_mean(estimates);
    std::vector<double> sq;
    for (double v : estimates) {
        sq.push_back((v - mean) * (v - mean));
    }
    const double mc = static_cast<double>(T - k) * pairwise_sum(sq) / static_cast<double>(estimates.size() - 1);
    const double avg = pairwise_mean(hac);
    const double rel = std::abs(avg - mc) / mc;
    const double t = sw.seconds();
    report(6, rel <= kHacRelTol && t < kBudget6, "HAC variance tracks the Monte Carlo variance",
           "mean sigma^2=" + fmt("%.4f", avg) + " (T-k)Var=" + fmt("%.4f", mc) + " rel err " + fmt("%.3f", rel), t);
}

void criterion7() {
    Stopwatch sw;
    SweepSpec spec;
    spec.env = "toy";
    spec.T_values = {900, 2500, 10000};
    spec.replications = 1000;
    spec.master_seed = kSeed + 7;
    const std::vector<int> candidates{-1, 0, 1, 2, 3, 4, 5, 6, 7};
    const LepskiStudy s = run_lepski_study(spec, candidates);
    const double t = sw.seconds();

    std::vector<double> low;
    for (const auto& row : s.rows) {
        low.push_back(row.frequency[0] + row.frequency[1]);
    }
    bool monotone = low.front() > low.back();
    for (std::size_t i = 0; i + 1 < low.size(); ++i) {
        monotone = monotone && low[i + 1] <= low[i];
    }
    const LepskiStudyRow& last = s.rows.back();
    std::size_t mode = 0;
    for (std::size_t i = 1; i < last.frequency.size(); ++i) {
        if (last.frequency[i] > last.frequency[mode]) {
            mode = i;
        }
    }
    const int mode_k = candidates[mode];
    const double base_m1 = s.fixed.cell(-1, 10000).mse;
    const double base_0 = s.fixed.cell(0, 10000).mse;
    const bool beats = last.mse < base_m1 && last.mse < base_0;
    report(7, (mode_k == 1 || mode_k == 2) && monotone && beats && t < kBudget7,
           "Lepski selection concentrates on k in {1,2} and beats the baselines",
           "mode k=" + std::to_string(mode_k) + " at 1e4; P{-1,0}=" + fmt("%.3f", low[0]) + "," +
               fmt("%.3f", low[1]) + "," + fmt("%.3f", low[2]) + "; MSE sel " + fmt("%.4f", last.mse) +
               " vs " + fmt("%.4f", base_m1) + "/" + fmt("%.4f", base_0),
           t);
}

void criterion8() {
    Stopwatch sw;
    bool conditions = true;
    double worst_stationary = 0.0;
    for (int Q : {1, 3, 6}) {
        for (double t0 : {0.5, 1.0, 4.0}) {
            for (double zeta : {0.3, 0.7, 1.5}) {
                const auto p = HardInstanceParams::from_mixing_time(Q, t0, zeta, 0.5, 1.0, 2.0);
                const auto pair = hard_instance_pair(p);
                conditions = conditions && check_hard_instance(pair, p, t0).all();
                const Distribution d =
                    stationary_distribution(policy_transition_matrix(pair.first, pair.target));
                worst_stationary =
                    std::max(worst_stationary, std::abs(d(Q - 1) - std::pow(1.0 - p.delta, Q - 1)));
            }
        }
    }
    // 2 T Delta^2 / (M2 - M1^2) exp(-(Q - 1)(1/t0 + zeta)) substituted by hand.
    const double kl_err = std::max(
        {std::abs(kl_bound(HardInstanceParams::from_mixing_time(3, 1.0, 0.5, 0.2, 1.0, 2.0), 50, 1.0) -
                  4.0 * std::exp(-3.0)),
         std::abs(kl_bound(HardInstanceParams::from_mixing_time(2, 4.0, 1.0, 0.5, 1.0, 3.0), 10, 4.0) -
                  2.5 * std::exp(-1.25)),
         std::abs(kl_bound(HardInstanceParams::from_mixing_time(6, 0.5, 0.3, 0.25, 1.0, 2.0), 1000, 0.5) -
                  125.0 * std::exp(-11.5))});
    const double t = sw.seconds();
    report(8, conditions && worst_stationary <= kStationaryTol && kl_err <= kKlTol && t < kBudget8,
           "hard-instance conditions, stationary mass and KL bound",
           std::string(conditions ? "27/27 grid points admissible" : "grid point failed") + "; P[h_Q] err " +
               fmt("%.1e", worst_stationary) + "; KL err " + fmt("%.1e", kl_err),
           t);
}

void criterion9() {
    Stopwatch sw;
    bool confined = true;
    for (std::uint64_t r = 0; r < 200 && confined; ++r) {
        for (GlucosePolicy p : {GlucosePolicy::behavior, GlucosePolicy::target}) {
            for (double y : glucose_simulate(1000, 50, p, stream_seed(kSeed + 90, r)).y) {
                confined = confined && (y == 0.0 || y == -1.0 || y == -2.0 || y == -3.0);
            }
        }
    }
    SweepSpec spec;
    spec.env = "glucose";
    spec.k_values = {-1, 0, 1, 2, 3, 4, 5, 6, 7, 8};
    spec.T_values = {1000};
    spec.replications = 2000;
    spec.burn_in = 50;
    spec.master_seed = kSeed + 9;
    const SweepResult r = run_sweep(spec);
    const GlucoseOracle cached = glucose_oracle();
    const bool reused = r.oracle.provenance == "monte-carlo" && r.oracle.value == cached.value &&
                        r.oracle.seed == kGlucoseOracleSeed && r.oracle.hours == kGlucoseOracleHours;
    const Shape sh = mse_shape(r, 1000);
    const double t = sw.seconds();
    std::string curve;
    for (double m : mse_curve(r, 1000)) {
        curve += fmt("%.3f ", m);
    }
    report(9, confined && reused && sh.u && sh.kmin >= 2 && sh.kmin <= 5 && t < kBudget9,
           "glucose MSE is U-shaped with argmin in {2..5}",
           std::string(confined ? "utilities in {-3..0}" : "utility out of range") + "; oracle " +
               fmt("%.4f", r.oracle.value) + (reused ? " (cached)" : " (not reused)") + "; argmin k=" +
               std::to_string(sh.kmin) + (sh.u ? " U" : " not U") +
               (sh.strict ? " (strict)" : " (not strict)") + "; MSE " + curve,
           t);
}

void criterion10() {
    Stopwatch sw;
    bool same = true;
    for (const char* env : {"toy", "hard:Q=3,t0=2,zeta=0.5", "glucose"}) {
        SweepSpec spec;
        spec.env = env;
        spec.k_values = {-1, 0, 1, 2, 4};
        spec.T_values = {150, 400};
        spec.replications = 64;
        spec.burn_in = default_burn_in(env);
        spec.master_seed = kSeed + 10;
        const auto e = make_environment(env);
        const std::string base = csv_of(run_sweep(spec, *e, {1}));
        for (std::size_t threads : {4u, 16u}) {
            same = same && csv_of(run_sweep(spec, *e, {threads})) == base;
        }
    }
    report(10, same, "sweep CSV is byte-identical across 1, 4 and 16 workers",
           same ? "toy, hard and glucose sweeps identical" : "outputs differ", sw.seconds());
}

} // namespace

int main() {
    std::printf("master seed %#llx\n", static_cast<unsigned long long>(kSeed));
    criterion1();
    criterion2();
    criterion3();
    criteria4and5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
