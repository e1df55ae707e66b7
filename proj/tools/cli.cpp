#include "cli.hpp"

#include "ope/estimators.hpp"
#include "ope/glucose.hpp"
#include "ope/harness.hpp"
#include "ope/instances.hpp"
#include "ope/io.hpp"
#include "ope/rng.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace ope::cli {

namespace {

struct Options {
    std::string env;
    std::string model;
    std::string target;
    std::string behavior;
    std::string trajectory;
    std::string policy = "target";
    std::string hard;
    std::string out;
    std::string k_set = "-1..5";
    std::string T_set;
    std::optional<int> k;
    std::size_t T = 1000;
    std::optional<std::size_t> burn_in;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    double bandwidth_exp = 1.0 / 3.0;
    std::size_t replications = 1;
    double C0 = 1.0;
    bool check = false;
};

// Everything a subcommand may need to know about the chosen environment.
struct Loaded {
    std::string name;
    std::optional<FiniteEnvironment> finite;
    std::optional<HardEnvironmentSpec> hard;
    std::optional<HardInstancePair> pair;
    bool glucose = false;
};

Json policy_doc(const Json& doc, const char* role) {
    return doc.contains(role) ? doc.at(role) : doc;
}

Loaded load(const Options& opt) {
    Loaded l;
    if (!opt.model.empty()) {
        const Json model_doc = load_json_file(opt.model);
        PomdpModel model = model_from_json(model_doc);
        const Json target_doc = opt.target.empty() ? model_doc : load_json_file(opt.target);
        const Json behavior_doc = opt.behavior.empty() ? model_doc : load_json_file(opt.behavior);
        if (!target_doc.contains("target") && !target_doc.contains("probs")) {
            throw ConfigError("--model needs --target (or a bundle carrying a target policy)");
        }
        if (!behavior_doc.contains("behavior") && !behavior_doc.contains("probs")) {
            throw ConfigError("--model needs --behavior (or a bundle carrying a behavior policy)");
        }
        Policy target = policy_from_json(policy_doc(target_doc, "target"));
        Policy behavior = policy_from_json(policy_doc(behavior_doc, "behavior"));
        check_compatible(model, target);
        check_compatible(model, behavior);
        l.name = opt.model;
        l.finite = FiniteEnvironment{std::move(model), std::move(behavior), std::move(target)};
        return l;
    }
    std::string env = opt.env;
    if (env.empty() && !opt.hard.empty()) {
        env = "hard:" + opt.hard;
    }
    if (env.empty()) {
        throw ConfigError("an environment is required (--env toy|glucose|hard:... or --model)");
    }
    l.name = env;
    if (env == "toy") {
        l.finite = toy_model();
    } else if (env == "glucose") {
        l.glucose = true;
    } else if (env.starts_with("hard:")) {
        l.hard = parse_hard_spec(std::string_view(env).substr(5));
        l.pair = hard_instance_pair(l.hard->params);
        const PomdpModel& m = l.hard->instance == 1 ? l.pair->first : l.pair->second;
        l.finite = FiniteEnvironment{m, l.pair->behavior, l.pair->target};
    } else {
        throw ConfigError("unknown environment '" + env + "' (expected toy, glucose or hard:...)");
    }
    return l;
}

std::unique_ptr<Environment> environment_of(const Loaded& l) {
    if (l.glucose) {
        return std::make_unique<GlucoseEnvironment>();
    }
    return std::make_unique<FiniteModelEnvironment>(l.name, *l.finite);
}

std::size_t burn_in_of(const Options& opt, const Loaded& l) {
    if (opt.burn_in) {
        return *opt.burn_in;
    }
    return l.glucose ? 50 : 100;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (int v : parse_int_list(text)) {
        if (v < 1) {
            throw ConfigError("horizons must be positive");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

int parse_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

// Writes to --out when given, otherwise to the command's stdout.
void emit(const Options& opt, std::ostream& out, const std::string& text) {
    if (opt.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(opt.out);
    if (!f) {
        throw ConfigError("cannot write " + opt.out);
    }
    f << text;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) {
        throw ConfigError("cannot write " + path);
    }
    f << text;
}

std::string dump(const Json& j) {
    return j.dump(2) + "\n";
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::vector<RatioTrajectory> collect_units(const Options& opt, const Loaded& l) {
    std::vector<RatioTrajectory> units;
    if (!opt.trajectory.empty()) {
        if (!l.finite) {
            throw ConfigError("--trajectory needs a finite environment for its policies");
        }
        std::ifstream in(opt.trajectory);
        if (!in) {
            throw ConfigError("cannot open " + opt.trajectory);
        }
        units.push_back(importance_ratios(read_trajectory_csv(in), l.finite->target, l.finite->behavior));
        return units;
    }
    const auto env = environment_of(l);
    for (std::size_t u = 0; u < opt.replications; ++u) {
        units.push_back(env->simulate(opt.T, burn_in_of(opt, l), stream_seed(opt.seed, 0, u)));
    }
    return units;
}

int cmd_simulate(const Options& opt, const Loaded& l, std::ostream& out) {
    std::ostringstream text;
    if (l.glucose) {
        if (opt.policy != "behavior" && opt.policy != "target") {
            throw ConfigError("--policy must be behavior or target");
        }
        const auto policy = opt.policy == "target" ? GlucosePolicy::target : GlucosePolicy::behavior;
        write_glucose_csv(text, glucose_simulate(opt.T, burn_in_of(opt, l), policy, opt.seed));
    } else {
        write_trajectory_csv(text, simulate(l.finite->model, l.finite->behavior, opt.T,
                                            burn_in_of(opt, l), opt.seed));
    }
    emit(opt, out, text.str());
    return kOk;
}

int cmd_estimate(const Options& opt, const Loaded& l, std::ostream& out) {
    const std::vector<RatioTrajectory> units = collect_units(opt, l);
    EstimatorConfig config;
    config.alpha = opt.alpha;
    config.bandwidth = BandwidthRule::power(opt.bandwidth_exp)(units.front().length());
    if (opt.k) {
        config.k = *opt.k;
    } else {
        if (!l.finite) {
            throw ConfigError("--k is required for environments without an exact mixing report");
        }
        const MixingOverlapReport mix =
            mixing_overlap_report(l.finite->model, l.finite->target, l.finite->behavior);
        if (mix.overlap_violated) {
            throw OverlapError("target policy is not dominated by the behavior policy");
        }
        config.k = rate_optimal_window(units.size(), units.front().length(), mix.mixing_time,
                                       mix.overlap_zeta, opt.C0);
    }
    emit(opt, out, dump(report_to_json(estimate_with_ci(units, config))));
    return kOk;
}

SweepSpec sweep_spec(const Options& opt, const Loaded& l, const std::vector<int>& ks) {
    SweepSpec spec;
    spec.env = l.name;
    spec.k_values = ks;
    spec.T_values = opt.T_set.empty() ? std::vector<std::size_t>{opt.T} : parse_size_list(opt.T_set);
    spec.replications = opt.replications;
    spec.burn_in = burn_in_of(opt, l);
    spec.master_seed = opt.seed;
    spec.bandwidth = BandwidthRule::power(opt.bandwidth_exp);
    spec.alpha = opt.alpha;
    return spec;
}

int cmd_lepski(const Options& opt, const Loaded& l, std::ostream& out) {
    const std::vector<int> candidates = parse_int_list(opt.k_set);
    if (opt.replications <= 1 || !opt.trajectory.empty()) {
        Options single = opt;
        single.replications = 1;
        const std::vector<RatioTrajectory> units = collect_units(single, l);
        const LepskiResult result =
            lepski_select(units, candidates, opt.alpha, BandwidthRule::power(opt.bandwidth_exp));
        emit(opt, out, dump(lepski_to_json(result)));
        return kOk;
    }
    const auto env = environment_of(l);
    const LepskiStudy study = run_lepski_study(sweep_spec(opt, l, candidates), candidates, *env);
    std::ostringstream csv;
    write_selection_csv(csv, study);
    if (opt.out.empty()) {
        out << csv.str();
    } else {
        write_file(opt.out, csv.str());
        write_file(opt.out + ".json", dump(lepski_study_to_json(study)));
        for (const auto& row : study.rows) {
            out << "T=" << row.T << " lepski_mse=" << fixed4(row.mse) << '\n';
        }
    }
    return kOk;
}

int cmd_sweep(const Options& opt, const Loaded& l, std::ostream& out) {
    const auto env = environment_of(l);
    const SweepResult result = run_sweep(sweep_spec(opt, l, parse_int_list(opt.k_set)), *env);
    std::ostringstream csv;
    write_sweep_csv(csv, result);
    if (opt.out.empty()) {
        out << csv.str();
        return kOk;
    }
    write_file(opt.out, csv.str());
    write_file(opt.out + ".json", dump(sweep_to_json(result)));
    out << std::left << std::setw(6) << "k" << std::setw(8) << "T" << std::setw(12) << "mse"
        << std::setw(12) << "bias" << "coverage\n";
    for (const auto& c : result.cells) {
        out << std::setw(6) << c.k << std::setw(8) << c.T << std::setw(12) << fixed4(c.mse)
            << std::setw(12) << fixed4(c.bias) << fixed4(c.ci_coverage) << '\n';
    }
    return kOk;
}

int cmd_instance(const Options& opt, const Loaded& l, std::ostream& out) {
    if (l.glucose) {
        if (opt.check) {
            throw ConfigError("--check applies to finite instances only");
        }
        std::ostringstream text;
        write_glucose_csv(text, glucose_simulate(opt.T, burn_in_of(opt, l), GlucosePolicy::behavior,
                                                 opt.seed));
        emit(opt, out, text.str());
        return kOk;
    }
    if (opt.check) {
        if (!l.hard) {
            throw ConfigError("--check needs a hard instance (--hard or --env hard:...)");
        }
        const HardInstanceConditions c = check_hard_instance(*l.pair, l.hard->params, l.hard->t0);
        const auto line = [&](const char* name, bool ok, const std::string& detail) {
            out << name << ' ' << (ok ? "PASS" : "FAIL") << "  " << detail << '\n';
        };
        line("C1 overlap", c.overlap,
             "max ratio " + fixed4(c.max_ratio) + " <= exp(zeta) " + fixed4(std::exp(l.hard->params.zeta)));
        line("C2 mixing", c.mixing,
             "dobrushin " + fixed4(c.dobrushin) + " <= exp(-1/t0) " + fixed4(c.mixing_bound));
        line("C3 first moment", c.first_moment,
             "max |E Y| " + fixed4(c.max_abs_mean) + " <= M1 " + fixed4(l.hard->params.M1));
        line("C4 second moment", c.second_moment,
             "max E Y^2 " + fixed4(c.max_second_moment) + " <= M2 " + fixed4(l.hard->params.M2));
        return c.all() ? kOk : kFailure;
    }
    Json doc;
    if (l.pair) {
        doc["model"] = model_to_json(l.pair->first);
        doc["alternative"] = model_to_json(l.pair->second);
        const HardInstanceParams& p = l.hard->params;
        doc["params"] = {{"Q", p.Q}, {"delta", p.delta}, {"Delta", p.Delta}, {"M1", p.M1},
                         {"M2", p.M2}, {"zeta", p.zeta}, {"t0", l.hard->t0}};
        doc["kl_bound"] = kl_bound(p, opt.T, l.hard->t0);
        doc["kl_horizon"] = opt.T;
    } else {
        doc["model"] = model_to_json(l.finite->model);
    }
    doc["behavior"] = policy_to_json(l.finite->behavior);
    doc["target"] = policy_to_json(l.finite->target);
    emit(opt, out, dump(doc));
    return kOk;
}

int cmd_oracle(const Options& opt, const Loaded& l, std::ostream& out) {
    if (opt.policy != "target" && opt.policy != "behavior") {
        throw ConfigError("--policy must be target or behavior");
    }
    Json doc{{"env", l.name}, {"policy", opt.policy}};
    if (l.glucose) {
        if (opt.policy != "target") {
            throw ConfigError("the glucose oracle is available for the target policy only");
        }
        const GlucoseOracle o = glucose_oracle();
        doc["value"] = o.value;
        doc["provenance"] = "monte-carlo";
        doc["seed"] = o.seed;
        doc["hours"] = o.hours;
    } else {
        const FiniteEnvironment& f = *l.finite;
        const Policy& policy = opt.policy == "target" ? f.target : f.behavior;
        const Distribution d = stationary_distribution(policy_transition_matrix(f.model, policy));
        const MixingOverlapReport mix = mixing_overlap_report(f.model, f.target, f.behavior);
        doc["value"] = policy_value_exact(f.model, policy);
        doc["provenance"] = "exact";
        doc["stationary"] = std::vector<double>(d.data(), d.data() + d.size());
        doc["dobrushin"] = mix.dobrushin;
        doc["mixing_time"] = std::isfinite(mix.mixing_time) ? Json(mix.mixing_time) : Json("inf");
        doc["overlap_zeta"] = std::isfinite(mix.overlap_zeta) ? Json(mix.overlap_zeta) : Json("inf");
        doc["overlap_violated"] = mix.overlap_violated;
    }
    emit(opt, out, dump(doc));
    return kOk;
}

} // namespace

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const int lo = parse_int(std::string_view(text).substr(0, dots));
        const int hi = parse_int(std::string_view(text).substr(dots + 2));
        if (hi < lo) {
            throw ConfigError("empty range '" + text + "'");
        }
        for (int v = lo; v <= hi; ++v) {
            out.push_back(v);
        }
        return out;
    }
    std::string_view rest(text);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        out.push_back(parse_int(rest.substr(0, comma)));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (out.empty()) {
        throw ConfigError("empty list");
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Off-policy evaluation toolkit for finite POMDPs"};
    app.require_subcommand(1, 1);
    Options opt;

    const auto add_env = [&](CLI::App* sub) {
        sub->add_option("--env", opt.env, "toy, glucose, or hard:Q=..,t0=..,zeta=..");
        sub->add_option("--model", opt.model, "model JSON (or bundle with model/behavior/target)");
        sub->add_option("--target", opt.target, "target policy JSON");
        sub->add_option("--behavior", opt.behavior, "behavior policy JSON");
        sub->add_option("--out", opt.out, "output path (default stdout)");
    };
    const auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--T", opt.T, "horizon")->check(CLI::PositiveNumber);
        sub->add_option("--burn-in", opt.burn_in, "discarded warm-up steps (default 100; glucose 50)");
        sub->add_option("--seed", opt.seed, "master seed");
    };
    const auto add_est = [&](CLI::App* sub) {
        sub->add_option("--alpha", opt.alpha, "interval level")->check(CLI::Range(1e-12, 1.0 - 1e-12));
        sub->add_option("--bandwidth-exp", opt.bandwidth_exp, "B_T = T^exp (default 1/3)");
        sub->add_option("--replications", opt.replications, "units or replications")
            ->check(CLI::PositiveNumber);
    };

    auto* simulate_cmd = app.add_subcommand("simulate", "simulate a behavior-policy trajectory (CSV)");
    add_env(simulate_cmd);
    add_sim(simulate_cmd);
    simulate_cmd->add_option("--policy", opt.policy, "glucose only: behavior or target");

    auto* estimate_cmd = app.add_subcommand("estimate", "partial-history weighted estimate with interval");
    add_env(estimate_cmd);
    add_sim(estimate_cmd);
    add_est(estimate_cmd);
    estimate_cmd->add_option("--k", opt.k, "window length (default: rate-optimal choice)");
    estimate_cmd->add_option("--C0", opt.C0, "constant of the rate-optimal window")->check(CLI::PositiveNumber);
    estimate_cmd->add_option("--trajectory", opt.trajectory, "trajectory CSV instead of simulating");

    auto* lepski_cmd = app.add_subcommand("lepski", "adaptive window selection");
    add_env(lepski_cmd);
    add_sim(lepski_cmd);
    add_est(lepski_cmd);
    lepski_cmd->add_option("--k-set", opt.k_set, "candidate windows, e.g. -1..7 (use --k-set=-1..7)");
    lepski_cmd->add_option("--T-set", opt.T_set, "horizons for a selection study");
    lepski_cmd->add_option("--trajectory", opt.trajectory, "trajectory CSV instead of simulating");

    auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo MSE sweep over (k, T)");
    add_env(sweep_cmd);
    add_sim(sweep_cmd);
    add_est(sweep_cmd);
    sweep_cmd->add_option("--k-set", opt.k_set, "window lengths, e.g. -1..5");
    sweep_cmd->add_option("--T-set", opt.T_set, "horizons, e.g. 200,600,1400");

    auto* instance_cmd = app.add_subcommand("instance", "emit an environment (model JSON or glucose CSV)");
    add_env(instance_cmd);
    add_sim(instance_cmd);
    instance_cmd->add_option("--hard", opt.hard, "Q=..,t0=..,zeta=..[,M1=..,M2=..,Delta=..]");
    instance_cmd->add_flag("--check", opt.check, "check the hard-instance admissibility conditions");

    auto* oracle_cmd = app.add_subcommand("oracle", "exact stationary value of a policy");
    add_env(oracle_cmd);
    oracle_cmd->add_option("--policy", opt.policy, "target or behavior");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        const Loaded loaded = load(opt);
        if (*simulate_cmd) return cmd_simulate(opt, loaded, out);
        if (*estimate_cmd) return cmd_estimate(opt, loaded, out);
        if (*lepski_cmd) return cmd_lepski(opt, loaded, out);
        if (*sweep_cmd) return cmd_sweep(opt, loaded, out);
        if (*instance_cmd) return cmd_instance(opt, loaded, out);
        if (*oracle_cmd) return cmd_oracle(opt, loaded, out);
        return kConfigError;
    } catch (const OverlapError& e) {
        err << "overlap violation: " << e.what() << '\n';
        return kOverlapViolation;
    } catch (const MixingError& e) {
        err << "mixing failure: " << e.what() << '\n';
        return kMixingFailure;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::domain_error& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Json::exception& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

} // namespace ope::cli
