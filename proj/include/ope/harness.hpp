#pragma once

#include "ope/estimators.hpp"
#include "ope/glucose.hpp"
#include "ope/instances.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ope {

/// Ground-truth V(pi) and where it came from.
struct OracleValue {
    double value = 0.0;
    std::string provenance = "exact";  // "exact" or "monte-carlo"
    std::uint64_t seed = 0;
    std::size_t hours = 0;
};

/// Anything that can produce behavior-policy data and knows the target's value.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    virtual RatioTrajectory simulate(std::size_t T, std::size_t burn_in, std::uint64_t seed) const = 0;
    virtual OracleValue oracle() const = 0;
};

/// Finite POMDP with an exact oracle. Refuses construction when the target is not dominated.
class FiniteModelEnvironment final : public Environment {
public:
    FiniteModelEnvironment(std::string name, FiniteEnvironment env);

    std::string name() const override { return name_; }
    RatioTrajectory simulate(std::size_t T, std::size_t burn_in, std::uint64_t seed) const override;
    OracleValue oracle() const override { return oracle_; }

    const FiniteEnvironment& finite() const noexcept { return env_; }

private:
    std::string name_;
    FiniteEnvironment env_;
    OracleValue oracle_;
};

class GlucoseEnvironment final : public Environment {
public:
    explicit GlucoseEnvironment(GlucoseParams params = {},
                                std::uint64_t oracle_seed = kGlucoseOracleSeed,
                                std::size_t oracle_hours = kGlucoseOracleHours);

    std::string name() const override { return "glucose"; }
    RatioTrajectory simulate(std::size_t T, std::size_t burn_in, std::uint64_t seed) const override;
    OracleValue oracle() const override;

private:
    GlucoseParams params_;
    std::uint64_t oracle_seed_;
    std::size_t oracle_hours_;
};

/// Parsed `hard:Q=..,t0=..,zeta=..[,M1=..,M2=..,Delta=..,instance=1|2]`.
struct HardEnvironmentSpec {
    HardInstanceParams params;
    double t0 = 1.0;
    int instance = 1;
};

/// Parses "Q=3,t0=1,zeta=0.69,..."; M1 = 1, M2 = 2 and Delta = M1/2 unless given.
HardEnvironmentSpec parse_hard_spec(std::string_view text);

/// `toy`, `glucose`, or `hard:...`; unknown names throw ConfigError.
std::unique_ptr<Environment> make_environment(std::string_view spec);

std::size_t default_burn_in(std::string_view env_spec);

struct SweepSpec {
    std::string env = "toy";
    std::vector<int> k_values;
    std::vector<std::size_t> T_values;
    std::size_t replications = 1;
    std::size_t burn_in = 100;
    std::uint64_t master_seed = 0;
    BandwidthRule bandwidth = BandwidthRule::power(1.0 / 3.0);
    double alpha = 0.05;

    void validate() const;
};

struct SweepCell {
    int k = 0;
    std::size_t T = 0;
    double mse = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    double mean_estimate = 0.0;
    double ci_coverage = 0.0;
    std::size_t n_replications = 0;
    /// Per-replication estimates in replication order, for paired comparisons across k.
    std::vector<double> estimates;
};

struct SweepResult {
    std::string env;
    SweepSpec spec;
    OracleValue oracle;
    std::vector<SweepCell> cells;  // T-major, k-minor, in the order of the sweep lists

    const SweepCell& cell(int k, std::size_t T) const;
};

struct RunOptions {
    /// Worker count; 0 means OPE_THREADS if set, else the hardware concurrency.
    std::size_t threads = 0;
};

std::size_t resolve_threads(std::size_t requested);

/// Seed of replication r at horizon T; fresh, independent draws per T.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t T, std::size_t replication);

/**
 * For every T and replication, simulate one behavior trajectory and evaluate
 * every k on it (paired across k). Aggregates MSE, bias, variance and CI
 * coverage against the oracle. Output is independent of the worker count.
 */
SweepResult run_sweep(const SweepSpec& spec, const Environment& env, RunOptions options = {});
SweepResult run_sweep(const SweepSpec& spec, RunOptions options = {});

struct LepskiStudyRow {
    std::size_t T = 0;
    std::vector<double> frequency;  // per candidate
    double mse = 0.0;               // of the selected estimator
    double bias = 0.0;
    double variance = 0.0;
};

struct LepskiStudy {
    std::vector<int> candidates;
    SweepResult fixed;  // per-candidate curves on the same trajectories
    std::vector<LepskiStudyRow> rows;
};

LepskiStudy run_lepski_study(const SweepSpec& spec, const std::vector<int>& candidates,
                             const Environment& env, RunOptions options = {});
LepskiStudy run_lepski_study(const SweepSpec& spec, const std::vector<int>& candidates,
                             RunOptions options = {});

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> residuals;
};

/// OLS of log(rmse) on log(nT). Needs >= 3 points with positive coordinates.
RateFit fit_rate(std::span<const std::pair<double, double>> points);

} // namespace ope
