#include "ope/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ope {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json model_to_json(const PomdpModel& model) {
    Json doc;
    doc["num_x"] = model.num_x();
    doc["num_h"] = model.num_h();
    doc["num_actions"] = model.num_actions();
    Json transition = Json::array();
    for (const auto& k : model.transitions()) {
        Json rows = Json::array();
        for (Eigen::Index s = 0; s < k.rows(); ++s) {
            Json row = Json::array();
            for (Eigen::Index s2 = 0; s2 < k.cols(); ++s2) {
                row.push_back(k(s, s2));
            }
            rows.push_back(std::move(row));
        }
        transition.push_back(std::move(rows));
    }
    doc["transition"] = std::move(transition);
    Json reward = Json::array();
    for (const auto& r : model.rewards()) {
        reward.push_back({{"kind", r.kind == RewardDist::Kind::gaussian ? "gaussian" : "point_mass"},
                          {"mean", r.mean},
                          {"sd", r.sd}});
    }
    doc["reward"] = std::move(reward);
    return doc;
}

namespace {

Eigen::MatrixXd matrix_from_json(const Json& rows, const std::string& what) {
    if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
        throw ConfigError(what + " must be a nonempty array of arrays");
    }
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd m(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const Json& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
            throw ConfigError(what + ": ragged row " + std::to_string(r));
        }
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

template <typename F>
auto with_config_errors(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

} // namespace

PomdpModel model_from_json(const Json& doc) {
    return with_config_errors("model document", [&] {
        if (doc.contains("model")) {
            return model_from_json(doc.at("model"));
        }
        const int num_x = doc.at("num_x").get<int>();
        const int num_h = doc.at("num_h").get<int>();
        const int num_actions = doc.at("num_actions").get<int>();
        std::vector<Kernel> transition;
        for (const auto& k : doc.at("transition")) {
            transition.push_back(matrix_from_json(k, "transition"));
        }
        std::vector<RewardDist> reward;
        for (const auto& r : doc.at("reward")) {
            const std::string kind = r.at("kind").get<std::string>();
            const double mean = r.at("mean").get<double>();
            const double sd = r.value("sd", 0.0);
            if (kind == "gaussian") {
                reward.push_back(RewardDist::gaussian(mean, sd));
            } else if (kind == "point_mass") {
                reward.push_back(RewardDist::point_mass(mean));
            } else {
                throw ConfigError("unknown reward kind '" + kind + "'");
            }
        }
        return PomdpModel(num_x, num_h, num_actions, std::move(transition), std::move(reward));
    });
}

Json policy_to_json(const Policy& policy) {
    Json probs = Json::array();
    for (int x = 0; x < policy.num_x(); ++x) {
        Json row = Json::array();
        for (int a = 0; a < policy.num_actions(); ++a) {
            row.push_back(policy.prob(x, a));
        }
        probs.push_back(std::move(row));
    }
    return Json{{"probs", std::move(probs)}};
}

Policy policy_from_json(const Json& doc) {
    return with_config_errors("policy document",
                              [&] { return Policy(matrix_from_json(doc.at("probs"), "probs")); });
}

Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": malformed JSON (" + e.what() + ")");
    }
}

Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str(), path.string());
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,h,w,y\n";
    for (std::size_t t = 0; t < traj.length(); ++t) {
        os << t + 1 << ',' << traj.x[t] << ',' << traj.h[t] << ',' << traj.w[t] << ','
           << format_double(traj.y[t]) << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "t,x,h,w,y") {
        throw ConfigError("trajectory CSV must start with header t,x,h,w,y");
    }
    Trajectory traj;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::size_t t = 0;
        int x = 0;
        int h = 0;
        int w = 0;
        double y = 0.0;
        char c1 = 0;
        char c2 = 0;
        char c3 = 0;
        char c4 = 0;
        if (!(row >> t >> c1 >> x >> c2 >> h >> c3 >> w >> c4 >> y) || c1 != ',' || c2 != ',' ||
            c3 != ',' || c4 != ',') {
            throw ConfigError("trajectory CSV: malformed line " + std::to_string(lineno));
        }
        traj.x.push_back(x);
        traj.h.push_back(h);
        traj.w.push_back(w);
        traj.y.push_back(y);
    }
    if (traj.y.empty()) {
        throw ConfigError("trajectory CSV has no rows");
    }
    return traj;
}

void write_glucose_csv(std::ostream& os, const GlucoseTrajectory& traj) {
    os << "t,gl,ex,di,in,y,behavior_prob,target_action\n";
    for (std::size_t t = 0; t < traj.length(); ++t) {
        os << t + 1 << ',' << format_double(traj.gl[t]) << ',' << format_double(traj.ex[t]) << ','
           << format_double(traj.di[t]) << ',' << traj.insulin[t] << ',' << traj.y[t] << ','
           << format_double(traj.behavior_prob[t]) << ',' << traj.target_action[t] << '\n';
    }
}

Json report_to_json(const EstimateReport& report) {
    return Json{{"value", report.value},
                {"variance", report.variance},
                {"ci", {report.ci_lo, report.ci_hi}},
                {"k", report.k},
                {"n_units", report.n_units},
                {"t_used", report.t_used},
                {"flags", report.flags}};
}

Json lepski_to_json(const LepskiResult& result) {
    Json reports = Json::array();
    for (const auto& r : result.reports) {
        reports.push_back(report_to_json(r));
    }
    return Json{{"selected_k", result.selected_k}, {"reports", std::move(reports)}};
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    os << "env,k,T,replications,mse,bias,variance,mean_estimate,ci_coverage,oracle\n";
    for (const auto& c : result.cells) {
        os << result.env << ',' << c.k << ',' << c.T << ',' << c.n_replications << ','
           << format_double(c.mse) << ',' << format_double(c.bias) << ','
           << format_double(c.variance) << ',' << format_double(c.mean_estimate) << ','
           << format_double(c.ci_coverage) << ',' << format_double(result.oracle.value) << '\n';
    }
}

namespace {

Json spec_to_json(const SweepSpec& spec) {
    return Json{{"env", spec.env},
                {"k_values", spec.k_values},
                {"T_values", spec.T_values},
                {"replications", spec.replications},
                {"burn_in", spec.burn_in},
                {"master_seed", spec.master_seed},
                {"bandwidth_rule",
                 {{"kind", spec.bandwidth.kind == BandwidthRule::Kind::power ? "power" : "fixed"},
                  {"param", spec.bandwidth.param}}},
                {"alpha", spec.alpha}};
}

Json oracle_to_json(const OracleValue& o) {
    Json j{{"value", o.value}, {"provenance", o.provenance}};
    if (o.provenance != "exact") {
        j["seed"] = o.seed;
        j["hours"] = o.hours;
    }
    return j;
}

} // namespace

Json sweep_to_json(const SweepResult& result) {
    Json cells = Json::array();
    for (const auto& c : result.cells) {
        cells.push_back({{"k", c.k},
                         {"T", c.T},
                         {"mse", c.mse},
                         {"bias", c.bias},
                         {"variance", c.variance},
                         {"mean_estimate", c.mean_estimate},
                         {"ci_coverage", c.ci_coverage},
                         {"n_replications", c.n_replications}});
    }
    Json seeds = Json::object();
    for (std::size_t T : result.spec.T_values) {
        seeds[std::to_string(T)] = replication_seed(result.spec.master_seed, T, 0);
    }
    return Json{{"env", result.env},
                {"spec", spec_to_json(result.spec)},
                {"oracle", oracle_to_json(result.oracle)},
                {"first_replication_seeds", std::move(seeds)},
                {"cells", std::move(cells)}};
}

void write_selection_csv(std::ostream& os, const LepskiStudy& study) {
    os << "env,T,k,frequency\n";
    for (const auto& row : study.rows) {
        for (std::size_t i = 0; i < study.candidates.size(); ++i) {
            os << study.fixed.env << ',' << row.T << ',' << study.candidates[i] << ','
               << format_double(row.frequency[i]) << '\n';
        }
    }
}

Json lepski_study_to_json(const LepskiStudy& study) {
    Json rows = Json::array();
    for (const auto& row : study.rows) {
        rows.push_back({{"T", row.T},
                        {"frequency", row.frequency},
                        {"selected_mse", row.mse},
                        {"selected_bias", row.bias},
                        {"selected_variance", row.variance}});
    }
    Json doc = sweep_to_json(study.fixed);
    doc["candidates"] = study.candidates;
    doc["lepski"] = std::move(rows);
    return doc;
}

} // namespace ope
