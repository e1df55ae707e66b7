#pragma once

#include "ope/estimators.hpp"
#include "ope/glucose.hpp"
#include "ope/harness.hpp"
#include "ope/pomdp.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ope {

using Json = nlohmann::json;

// Model document: {num_x, num_h, num_actions, transition: a -> s -> s',
//                  reward: [{kind, mean, sd}] indexed s * num_actions + a}
Json model_to_json(const PomdpModel& model);
PomdpModel model_from_json(const Json& doc);

// Policy document: {probs: x -> a}
Json policy_to_json(const Policy& policy);
Policy policy_from_json(const Json& doc);

/// Reads a JSON file; syntax errors become ConfigError with line and column.
Json load_json_file(const std::filesystem::path& path);
Json parse_json(const std::string& text, const std::string& source = "<input>");

/// Header `t,x,h,w,y`, t starting at 1.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

/// Header `t,gl,ex,di,in,y,behavior_prob,target_action`.
void write_glucose_csv(std::ostream& os, const GlucoseTrajectory& traj);

Json report_to_json(const EstimateReport& report);
Json lepski_to_json(const LepskiResult& result);

/// Header `env,k,T,replications,mse,bias,variance,mean_estimate,ci_coverage,oracle`.
void write_sweep_csv(std::ostream& os, const SweepResult& result);
/// Sweep settings, seeds and oracle provenance alongside the cells.
Json sweep_to_json(const SweepResult& result);

/// Header `env,T,k,frequency`.
void write_selection_csv(std::ostream& os, const LepskiStudy& study);
Json lepski_study_to_json(const LepskiStudy& study);

/// Shortest decimal form that round-trips (at most 17 significant digits).
std::string format_double(double v);

} // namespace ope
