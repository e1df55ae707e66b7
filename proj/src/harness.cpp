#include "ope/harness.hpp"
#include "ope/numeric.hpp"
#include "ope/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace ope {

std::size_t resolve_threads(std::size_t requested) {
    std::size_t cap = 0;
    if (const char* env = std::getenv("OPE_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != nullptr && *end == '\0' && v > 0) {
            cap = static_cast<std::size_t>(v);
        }
    }
    std::size_t n = requested;
    if (n == 0) {
        n = cap != 0 ? cap : std::max(1u, std::thread::hardware_concurrency());
    }
    if (cap != 0) {
        n = std::min(n, cap);
    }
    return std::max<std::size_t>(1, n);
}

namespace {

// Runs body(i) for i in [0, count). Exceptions are collected per item and the
// lowest-index one is rethrown, so failures do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::min(threads, std::max<std::size_t>(count, 1));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (std::size_t t = 0; t < n; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

struct ReplicationOutput {
    std::vector<double> estimate;  // per k
    std::vector<char> covered;     // per k
    std::size_t selected = 0;      // Lepski index, when requested
};

struct Replications {
    OracleValue oracle;
    std::vector<std::vector<ReplicationOutput>> by_T;  // [T index][replication]
};

Replications replicate(const SweepSpec& spec, const Environment& env, bool with_lepski,
                       RunOptions options) {
    spec.validate();
    Replications out;
    out.oracle = env.oracle();
    const std::size_t R = spec.replications;
    const std::size_t nT = spec.T_values.size();
    out.by_T.assign(nT, std::vector<ReplicationOutput>(R));

    parallel_for(nT * R, resolve_threads(options.threads), [&](std::size_t item) {
        const std::size_t ti = item / R;
        const std::size_t r = item % R;
        const std::size_t T = spec.T_values[ti];
        const RatioTrajectory traj =
            env.simulate(T, spec.burn_in, replication_seed(spec.master_seed, T, r));
        const std::span<const RatioTrajectory> units(&traj, 1);

        EstimatorConfig config;
        config.alpha = spec.alpha;
        config.bandwidth = spec.bandwidth(T);
        ReplicationOutput& slot = out.by_T[ti][r];
        std::vector<EstimateReport> reports;
        reports.reserve(spec.k_values.size());
        for (int k : spec.k_values) {
            config.k = k;
            reports.push_back(estimate_with_ci(units, config));
            const EstimateReport& rep = reports.back();
            slot.estimate.push_back(rep.value);
            slot.covered.push_back(rep.ci_lo <= out.oracle.value && out.oracle.value <= rep.ci_hi);
        }
        if (with_lepski) {
            slot.selected = lepski_select_index(reports);
        }
    });
    return out;
}

struct Moments {
    double mean = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;
};

Moments moments(std::span<const double> values, double truth) {
    Moments m;
    m.mean = pairwise_mean(values);
    m.bias = m.mean - truth;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        sq[i] = (values[i] - m.mean) * (values[i] - m.mean);
    }
    m.variance = pairwise_mean(sq);
    for (std::size_t i = 0; i < values.size(); ++i) {
        sq[i] = (values[i] - truth) * (values[i] - truth);
    }
    m.mse = pairwise_mean(sq);
    return m;
}

SweepResult aggregate(const SweepSpec& spec, const Environment& env, const Replications& reps) {
    SweepResult result;
    result.env = env.name();
    result.spec = spec;
    result.oracle = reps.oracle;
    const std::size_t R = spec.replications;
    std::vector<double> values(R);
    for (std::size_t ti = 0; ti < spec.T_values.size(); ++ti) {
        for (std::size_t ki = 0; ki < spec.k_values.size(); ++ki) {
            std::size_t covered = 0;
            for (std::size_t r = 0; r < R; ++r) {
                values[r] = reps.by_T[ti][r].estimate[ki];
                covered += reps.by_T[ti][r].covered[ki] != 0 ? 1 : 0;
            }
            const Moments m = moments(values, reps.oracle.value);
            SweepCell cell;
            cell.k = spec.k_values[ki];
            cell.T = spec.T_values[ti];
            cell.mse = m.mse;
            cell.bias = m.bias;
            cell.variance = m.variance;
            cell.mean_estimate = m.mean;
            cell.ci_coverage = static_cast<double>(covered) / static_cast<double>(R);
            cell.n_replications = R;
            cell.estimates = values;
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

} // namespace

void SweepSpec::validate() const {
    if (k_values.empty() || T_values.empty()) {
        throw ConfigError("sweep needs at least one k and one T");
    }
    if (replications < 1) {
        throw ConfigError("sweep needs replications >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0, 1)");
    }
    if (!(bandwidth.param > 0.0) && bandwidth.kind == BandwidthRule::Kind::fixed) {
        throw ConfigError("fixed bandwidth must be positive");
    }
    for (int k : k_values) {
        if (k < -1) {
            throw ConfigError("window lengths must be >= -1");
        }
        for (std::size_t T : T_values) {
            if (T < 1 || (k >= 0 && static_cast<std::size_t>(k) >= T)) {
                throw ConfigError("every k must be smaller than every T (k=" + std::to_string(k) +
                                  ", T=" + std::to_string(T) + ")");
            }
        }
    }
}

const SweepCell& SweepResult::cell(int k, std::size_t T) const {
    for (const auto& c : cells) {
        if (c.k == k && c.T == T) {
            return c;
        }
    }
    throw ConfigError("no sweep cell for k=" + std::to_string(k) + ", T=" + std::to_string(T));
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t T, std::size_t replication) {
    return stream_seed(stream_seed(master_seed, T), replication);
}

SweepResult run_sweep(const SweepSpec& spec, const Environment& env, RunOptions options) {
    return aggregate(spec, env, replicate(spec, env, false, options));
}

SweepResult run_sweep(const SweepSpec& spec, RunOptions options) {
    const auto env = make_environment(spec.env);
    return run_sweep(spec, *env, options);
}

LepskiStudy run_lepski_study(const SweepSpec& spec, const std::vector<int>& candidates,
                             const Environment& env, RunOptions options) {
    if (candidates.empty() || !std::is_sorted(candidates.begin(), candidates.end()) ||
        std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end()) {
        throw ConfigError("lepski candidates must be nonempty and strictly ascending");
    }
    SweepSpec study_spec = spec;
    study_spec.k_values = candidates;
    const Replications reps = replicate(study_spec, env, true, options);

    LepskiStudy study;
    study.candidates = candidates;
    study.fixed = aggregate(study_spec, env, reps);
    const std::size_t R = study_spec.replications;
    std::vector<double> selected_values(R);
    for (std::size_t ti = 0; ti < study_spec.T_values.size(); ++ti) {
        LepskiStudyRow row;
        row.T = study_spec.T_values[ti];
        std::vector<std::size_t> counts(candidates.size(), 0);
        for (std::size_t r = 0; r < R; ++r) {
            const ReplicationOutput& out = reps.by_T[ti][r];
            ++counts[out.selected];
            selected_values[r] = out.estimate[out.selected];
        }
        for (std::size_t c : counts) {
            row.frequency.push_back(static_cast<double>(c) / static_cast<double>(R));
        }
        const Moments m = moments(selected_values, reps.oracle.value);
        row.mse = m.mse;
        row.bias = m.bias;
        row.variance = m.variance;
        study.rows.push_back(std::move(row));
    }
    return study;
}

LepskiStudy run_lepski_study(const SweepSpec& spec, const std::vector<int>& candidates,
                             RunOptions options) {
    const auto env = make_environment(spec.env);
    return run_lepski_study(spec, candidates, *env, options);
}

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) {
        throw ConfigError("fit_rate needs at least 3 points");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& [nT, rmse] : points) {
        if (!(nT > 0.0) || !(rmse > 0.0)) {
            throw std::domain_error("fit_rate needs positive (nT, rmse) pairs");
        }
        lx.push_back(std::log(nT));
        ly.push_back(std::log(rmse));
    }
    const double mx = pairwise_mean(lx);
    const double my = pairwise_mean(ly);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) {
        throw std::domain_error("fit_rate needs at least two distinct nT values");
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double res = ly[i] - (fit.intercept + fit.slope * lx[i]);
        fit.residuals.push_back(res);
        ss_res += res * res;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

} // namespace ope
