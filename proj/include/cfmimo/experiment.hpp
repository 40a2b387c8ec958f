// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: cell-free massive MIMO power control and AP selection toolkit
// Copyright (C) 2026 The cfmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
/**
 * @file experiment.hpp
 * @brief Declarative experiment configs and the scenario runner.
 *
 * A config is one JSON document; every quantity carries its unit in the key
 * name. Unknown keys are rejected so typos surface as errors naming the full
 * field path. README.md documents the schema and the CSV columns.
 *
 * Work is split into independent (sweep point, realization) tasks that a
 * pool of threads executes; rows are written in task order, so the output
 * does not depend on the worker count.
 */
#ifndef CFMIMO_EXPERIMENT_HPP
#define CFMIMO_EXPERIMENT_HPP

#include "cfmimo/netmodel.hpp"
#include "cfmimo/powermodel.hpp"
#include "cfmimo/sca.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfmimo {

enum class Scenario {
    ValidateSe,
    Optimize,
    Select,
    SweepM,
    SweepN,
    SweepPbt,
    SweepTarget,
    CompareColocated,
};

const char* to_string(Scenario s);
/// Throws std::invalid_argument for unknown names.
Scenario parse_scenario(const std::string& name);
const std::vector<std::string>& scenario_names();

struct TargetSpec {
    enum class Kind { Uniform, PerUser, MatchSchemeII };
    Kind kind = Kind::MatchSchemeII;
    double value = 0.0;
    std::vector<double> per_user;

    /// Targets for one realization; scheme II SE when requested.
    std::vector<double> resolve(const ChannelStats& stats) const;
};

struct PowerSpec {
    double amplifier_efficiency = 0.4;
    double p_tc_W = 0.2;
    double p_0_W = 0.825;
    double p_bt_W_per_Gbps = 0.25;

    PowerParams params(const SystemConfig& cfg) const;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Optimize;
    SystemConfig system;
    PowerSpec power;
    TargetSpec targets;
    int realizations = 1;
    int workers = 1;
    std::string output_dir = "results";
    double delta_pct = 95.0;
    double sca_eps = 0.01;
    int sca_max_iter = 10;
    long mc_samples = 100000;

    std::vector<int> sweep_M;
    std::vector<int> sweep_N;
    int total_antennas = 256;
    std::vector<double> sweep_p_bt_W_per_Gbps;
    std::vector<double> sweep_target;

    /// Throws ConfigError for missing scenario fields or bad values.
    void validate() const;
    ScaOptions sca_options() const;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Standard simulation parameters, with per-scenario sizes and targets.
ExperimentConfig default_config(Scenario s);

/// Row of the per-realization CSV.
struct ResultRow {
    std::string sweep_param;
    double sweep_value = 0.0;
    int realization = 0;
    std::string method;
    int M = 0;
    int N = 0;
    int K = 0;
    std::string status;
    bool feasible = false;
    int iterations = 0;
    double ee = 0.0;
    double sum_se = 0.0;
    double total_power_W = 0.0;
    double amplifier_W = 0.0;
    double fixed_W = 0.0;
    double backhaul_traffic_W = 0.0;
    double serving_fraction = 1.0;
};

/// Row of the validate-se CSV.
struct ValidationRow {
    int realization = 0;
    int user = 0;
    double sinr_closed = 0.0;
    double sinr_mc = 0.0;
    double rel_gap = 0.0;
    double bu_closed = 0.0;
    double bu_mc = 0.0;
    double bu_se = 0.0;
    double ui_max_abs_z = 0.0;
};

struct SummaryRow {
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string method;
    int realizations = 0;
    double feasible_fraction = 0.0;
    double mean_ee = 0.0;
    double mean_sum_se = 0.0;
    double mean_total_power_W = 0.0;
    double mean_serving_fraction = 0.0;
};

struct ComparisonRow {
    std::string comparison;
    std::string sweep_param;
    double sweep_value = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<ValidationRow> validation;
    std::vector<SummaryRow> summary;
    std::vector<ComparisonRow> comparisons;
    int solver_failures = 0;
    bool any_feasible = false;
    std::vector<std::string> files;
};

/// Exit codes of run_experiment and the CLI.
enum ExitCode : int {
    ExitOk = 0,
    ExitInfeasibleEverywhere = 1,
    ExitSolverFailure = 2,
    ExitConfigError = 3,
};

/// Runs the scenario without touching the filesystem.
ExperimentResult compute_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Arithmetic means per (sweep point, method) of the per-realization rows.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_validation_csv(std::ostream& os, const std::vector<ValidationRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_comparisons_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);

/// Computes, writes <output_dir>/<scenario>*.csv and returns the exit code.
int run_experiment(const ExperimentConfig& cfg, ExperimentResult* result = nullptr,
                   std::ostream* log = nullptr);

}  // namespace cfmimo

#endif
