#include "ope/harness.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <string>

namespace ope {

FiniteModelEnvironment::FiniteModelEnvironment(std::string name, FiniteEnvironment env)
    : name_(std::move(name)), env_(std::move(env)) {
    const MixingOverlapReport report = mixing_overlap_report(env_.model, env_.target, env_.behavior);
    if (report.overlap_violated) {
        throw OverlapError("environment '" + name_ +
                           "': target policy is not dominated by the behavior policy");
    }
    oracle_.value = policy_value_exact(env_.model, env_.target);
    oracle_.provenance = "exact";
}

RatioTrajectory FiniteModelEnvironment::simulate(std::size_t T, std::size_t burn_in,
                                                 std::uint64_t seed) const {
    return importance_ratios(ope::simulate(env_.model, env_.behavior, T, burn_in, seed), env_.target,
                             env_.behavior);
}

GlucoseEnvironment::GlucoseEnvironment(GlucoseParams params, std::uint64_t oracle_seed,
                                       std::size_t oracle_hours)
    : params_(params), oracle_seed_(oracle_seed), oracle_hours_(oracle_hours) {}

RatioTrajectory GlucoseEnvironment::simulate(std::size_t T, std::size_t burn_in,
                                             std::uint64_t seed) const {
    return glucose_ratios(glucose_simulate(T, burn_in, GlucosePolicy::behavior, seed, params_));
}

OracleValue GlucoseEnvironment::oracle() const {
    const GlucoseOracle o = glucose_oracle(oracle_seed_, oracle_hours_, params_);
    return OracleValue{o.value, "monte-carlo", o.seed, o.hours};
}

namespace {

double parse_number(std::string_view key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(key));
    }
    return value;
}

} // namespace

HardEnvironmentSpec parse_hard_spec(std::string_view text) {
    std::map<std::string, double, std::less<>> kv;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("hard instance parameter '" + std::string(item) + "' is not key=value");
        }
        const std::string key(item.substr(0, eq));
        kv[key] = parse_number(key, item.substr(eq + 1));
    }
    for (const auto& [key, value] : kv) {
        (void)value;
        if (key != "Q" && key != "t0" && key != "zeta" && key != "M1" && key != "M2" &&
            key != "Delta" && key != "instance") {
            throw ConfigError("unknown hard instance parameter '" + key + "'");
        }
    }
    for (const char* required : {"Q", "t0", "zeta"}) {
        if (!kv.contains(required)) {
            throw ConfigError(std::string("hard instance needs ") + required);
        }
    }
    const double q = kv["Q"];
    if (q < 1.0 || q != std::floor(q)) {
        throw ConfigError("hard instance Q must be a positive integer");
    }
    HardEnvironmentSpec spec;
    spec.t0 = kv["t0"];
    const double M1 = kv.contains("M1") ? kv["M1"] : 1.0;
    const double M2 = kv.contains("M2") ? kv["M2"] : 2.0;
    const double Delta = kv.contains("Delta") ? kv["Delta"] : M1 / 2.0;
    spec.params = HardInstanceParams::from_mixing_time(static_cast<int>(q), spec.t0, kv["zeta"],
                                                       Delta, M1, M2);
    if (kv.contains("instance")) {
        const double inst = kv["instance"];
        if (inst != 1.0 && inst != 2.0) {
            throw ConfigError("hard instance selector must be 1 or 2");
        }
        spec.instance = static_cast<int>(inst);
    }
    return spec;
}

std::unique_ptr<Environment> make_environment(std::string_view spec) {
    if (spec == "toy") {
        return std::make_unique<FiniteModelEnvironment>("toy", toy_model());
    }
    if (spec == "glucose") {
        return std::make_unique<GlucoseEnvironment>();
    }
    if (spec.starts_with("hard:")) {
        const HardEnvironmentSpec hard = parse_hard_spec(spec.substr(5));
        HardInstancePair pair = hard_instance_pair(hard.params);
        FiniteEnvironment env{hard.instance == 1 ? std::move(pair.first) : std::move(pair.second),
                              std::move(pair.behavior), std::move(pair.target)};
        return std::make_unique<FiniteModelEnvironment>(std::string(spec), std::move(env));
    }
    throw ConfigError("unknown environment '" + std::string(spec) + "' (expected toy, glucose or hard:...)");
}

std::size_t default_burn_in(std::string_view env_spec) {
    return env_spec == "glucose" ? 50 : 100;
}

} // namespace ope
