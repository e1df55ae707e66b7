#include "ope/estimators.hpp"
#include "ope/numeric.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace ope {

double parzen_kernel(double x) noexcept {
    const double a = std::abs(x);
    if (a <= 0.5) {
        return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
    }
    if (a <= 1.0) {
        const double b = 1.0 - a;
        return 2.0 * b * b * b;
    }
    return 0.0;
}

namespace {

// sum_{t,u} Psi((t-u)/B) e_t e_u for one unit, via lags.
double kernel_quadratic_form(std::span<const double> e, double bandwidth) {
    const std::size_t m = e.size();
    std::vector<double> products(m);
    for (std::size_t t = 0; t < m; ++t) {
        products[t] = e[t] * e[t];
    }
    double total = pairwise_sum(products);
    for (std::size_t j = 1; j < m; ++j) {
        const double weight = parzen_kernel(static_cast<double>(j) / bandwidth);
        if (weight == 0.0) {
            break;
        }
        const std::size_t count = m - j;
        for (std::size_t t = 0; t < count; ++t) {
            products[t] = e[t] * e[t + j];
        }
        total += 2.0 * weight * pairwise_sum(std::span<const double>(products.data(), count));
    }
    return total;
}

} // namespace

HacVariance hac_variance(std::span<const RatioTrajectory> trajs, int k, double bandwidth) {
    if (trajs.empty()) {
        throw ConfigError("hac_variance needs at least one trajectory");
    }
    if (!(bandwidth > 0.0)) {
        throw ConfigError("bandwidth must be positive");
    }
    std::vector<std::vector<double>> terms;
    terms.reserve(trajs.size());
    std::vector<double> unit_means;
    for (const auto& traj : trajs) {
        terms.push_back(weighted_terms(traj, k));
        unit_means.push_back(pairwise_mean(terms.back()));
    }
    const double center = pairwise_mean(unit_means);

    std::vector<double> per_unit;
    per_unit.reserve(terms.size());
    for (auto& e : terms) {
        for (double& v : e) {
            v -= center;
        }
        per_unit.push_back(kernel_quadratic_form(e, bandwidth) / static_cast<double>(e.size()));
    }
    HacVariance out;
    out.value = pairwise_mean(per_unit);
    if (out.value < 0.0) {
        out.value = 0.0;
        out.clamped = true;
    }
    return out;
}

HacVariance hac_variance(std::span<const Trajectory> trajs, const Policy& target,
                         const Policy& behavior, int k, double bandwidth) {
    const auto ratios = importance_ratios(trajs, target, behavior);
    return hac_variance(ratios, k, bandwidth);
}

double BandwidthRule::operator()(std::size_t T) const {
    if (kind == Kind::fixed) {
        return param;
    }
    return std::pow(static_cast<double>(T), param);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ConfigError("normal quantile needs p in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

EstimateReport estimate_with_ci(std::span<const RatioTrajectory> trajs, const EstimatorConfig& config) {
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0, 1)");
    }
    EstimateReport report;
    report.k = config.k;
    report.n_units = trajs.size();
    report.value = phiw_estimate(trajs, config.k);

    const HacVariance hac = hac_variance(trajs, config.k, config.bandwidth);
    report.variance = hac.value;
    if (hac.clamped) {
        report.flags.emplace_back("variance_clamped");
    }

    std::size_t total_terms = 0;
    for (const auto& traj : trajs) {
        total_terms += usable_length(traj.length(), config.k);
    }
    report.t_used = total_terms / trajs.size();

    const double z = normal_quantile(1.0 - config.alpha / 2.0);
    const double half = z * std::sqrt(report.variance / static_cast<double>(total_terms));
    report.ci_lo = report.value - half;
    report.ci_hi = report.value + half;
    return report;
}

EstimateReport estimate_with_ci(std::span<const Trajectory> trajs, const Policy& target,
                                const Policy& behavior, const EstimatorConfig& config) {
    const auto ratios = importance_ratios(trajs, target, behavior);
    return estimate_with_ci(ratios, config);
}

} // namespace ope
