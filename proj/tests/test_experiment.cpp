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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cfmimo/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cfmimo;
using nlohmann::json;

namespace {

std::string error_of(const json& j)
{
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("cfmimo_test_" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

}  // namespace

TEST_CASE("scenario names round trip")
{
    CHECK(scenario_names().size() == 8);
    for (const std::string& n : scenario_names()) CHECK(to_string(parse_scenario(n)) == n);
    CHECK_THROWS_AS(parse_scenario("sweep-K"), std::invalid_argument);
}

TEST_CASE("config errors name the field path")
{
    CHECK(error_of(json{{"scenario", "optimize"}}).empty());
    CHECK(error_of(json{{"scenario", "optimise"}}).rfind("config.scenario:", 0) == 0);
    CHECK(error_of(json{{"realizations", 0}}).rfind("config.realizations:", 0) == 0);
    CHECK(error_of(json{{"realizations", "ten"}}).rfind("config.realizations:", 0) == 0);
    CHECK(error_of(json{{"colour", 1}}) == "config.colour: unknown field");
    CHECK(error_of(json{{"system", {{"MM", 3}}}}) == "config.system.MM: unknown field");
    CHECK(error_of(json{{"system", {{"M", 2.5}}}}).rfind("config.system.M:", 0) == 0);
    CHECK(error_of(json{{"system", {{"M", 0}}}}).rfind("config.system.M:", 0) == 0);
    CHECK(error_of(json{{"system", {{"tau_p", 300}}}}).rfind("config.system.tau_p:", 0) == 0);
    CHECK(error_of(json{{"system", {{"area_side_km", -1.0}}}}).rfind("config.system.area_side_km:", 0) == 0);
    CHECK(error_of(json{{"system", 5}}).rfind("config.system:", 0) == 0);
    CHECK(error_of(json{{"power", {{"amplifier_efficiency", 1.4}}}}).rfind("config.power.amplifier_efficiency:", 0) == 0);
    CHECK(error_of(json{{"targets", {{"kind", "uniform"}}}}).rfind("config.targets.value_bit_per_s_per_Hz:", 0) == 0);
    CHECK(error_of(json{{"targets", {{"kind", "per-user"}, {"values_bit_per_s_per_Hz", {1.0, 2.0}}}}})
              .rfind("config.targets.values_bit_per_s_per_Hz:", 0) == 0);
    CHECK(error_of(json{{"targets", {{"kind", "max"}}}}).rfind("config.targets.kind:", 0) == 0);
    CHECK(error_of(json{{"selection", {{"delta_pct", 0}}}}).rfind("config.selection.delta_pct:", 0) == 0);
    CHECK(error_of(json{{"sca", {{"eps", -1.0}}}}).rfind("config.sca.eps:", 0) == 0);
    CHECK(error_of(json{{"scenario", "sweep-N"}, {"sweep", {{"N", {3}}, {"total_antennas", 256}}}})
              .rfind("config.sweep.N:", 0) == 0);
    CHECK(error_of(json{{"scenario", "sweep-M"}, {"sweep", {{"M", json::array()}}}}).rfind("config.sweep.M:", 0) == 0);
    CHECK(error_of(json{{"sweep", {{"M", {1, "x"}}}}}).rfind("config.sweep.M[1]:", 0) == 0);
}

TEST_CASE("defaults and JSON round trip")
{
    ExperimentConfig d = default_config(Scenario::Optimize);
    CHECK(d.system.M == 100);
    CHECK(d.system.K == 20);
    CHECK(d.system.tau_c == 200);
    CHECK(d.system.rho_d_W == 1.0);
    CHECK(d.system.rho_p_W == 0.2);
    CHECK(d.system.bandwidth_Hz == 20e6);
    CHECK(d.system.noise_figure_dB == 9.0);
    CHECK(d.power.amplifier_efficiency == 0.4);
    CHECK(d.power.p_bt_W_per_Gbps == 0.25);
    CHECK(d.targets.kind == TargetSpec::Kind::MatchSchemeII);

    for (const std::string& n : scenario_names()) {
        ExperimentConfig c = default_config(parse_scenario(n));
        ExperimentConfig back = parse_config(to_json(c));
        CHECK(to_json(back) == to_json(c));
    }
    json j = to_json(d);
    j["power"]["p_bt_W_per_Gbps"] = 2.5;
    j["system"]["bandwidth_MHz"] = 10;
    ExperimentConfig c = parse_config(j);
    CHECK(c.power.params(c.system).p_bt(0) == doctest::Approx(2.5e-9));
    CHECK(c.system.bandwidth_Hz == 10e6);
}

TEST_CASE("summaries are arithmetic means of the rows")
{
    std::vector<ResultRow> rows(4);
    for (int i = 0; i < 4; ++i) {
        rows[i].sweep_param = "M";
        rows[i].sweep_value = i < 2 ? 10 : 20;
        rows[i].method = "sca";
        rows[i].realization = i % 2;
        rows[i].ee = i + 1.0;
        rows[i].feasible = i != 3;
        rows[i].sum_se = 2.0 * i;
    }
    std::vector<SummaryRow> s = summarize(rows);
    REQUIRE(s.size() == 2);
    CHECK(s[0].sweep_value == 10);
    CHECK(s[0].mean_ee == doctest::Approx(1.5));
    CHECK(s[1].mean_ee == doctest::Approx(3.5));
    CHECK(s[1].feasible_fraction == doctest::Approx(0.5));
    CHECK(s[1].mean_sum_se == doctest::Approx(5.0));
    CHECK(s[0].realizations == 2);
}

TEST_CASE("validate-se reports closed form against simulation")
{
    ExperimentConfig cfg = default_config(Scenario::ValidateSe);
    cfg.realizations = 1;
    cfg.output_dir = temp_dir("validate");
    ExperimentResult res;
    CHECK(run_experiment(cfg, &res) == ExitOk);
    REQUIRE(res.validation.size() == 4);
    for (const ValidationRow& v : res.validation) {
        CHECK(v.rel_gap < 0.02);
        CHECK(v.sinr_closed > 0.0);
    }
    const std::string csv = slurp(cfg.output_dir + "/validate-se.csv");
    CHECK(csv.rfind("realization,user,sinr_closed,sinr_mc,rel_gap,", 0) == 0);
    const std::string summary = slurp(cfg.output_dir + "/validate-se_summary.csv");
    CHECK(summary.rfind("samples,rows,max_rel_gap,", 0) == 0);
}

TEST_CASE("optimize reports the ratio against scheme II")
{
    ExperimentConfig cfg = default_config(Scenario::Optimize);
    cfg.realizations = 1;
    cfg.output_dir = temp_dir("optimize");
    ExperimentResult res;
    CHECK(run_experiment(cfg, &res) == ExitOk);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.rows[0].method == "sca");
    CHECK(res.rows[0].feasible);
    bool found = false;
    for (const ComparisonRow& c : res.comparisons) {
        if (c.comparison == "sca/equal_II") {
            found = true;
            CHECK(c.ratio == doctest::Approx(c.numerator / c.denominator));
            CHECK(c.ratio > 1.0);
        }
    }
    CHECK(found);
    CHECK(slurp(cfg.output_dir + "/optimize_comparisons.csv").find("sca/equal_II,none,0,") != std::string::npos);
}

TEST_CASE("reruns are byte identical and independent of the worker count")
{
    ExperimentConfig cfg = default_config(Scenario::SweepM);
    cfg.system.K = 4;
    cfg.sweep_M = {8, 12};
    cfg.realizations = 2;
    cfg.output_dir = temp_dir("rerun_a");
    REQUIRE(run_experiment(cfg) == ExitOk);
    const std::string a = slurp(cfg.output_dir + "/sweep-M.csv");
    const std::string as = slurp(cfg.output_dir + "/sweep-M_summary.csv");
    cfg.output_dir = temp_dir("rerun_b");
    cfg.workers = 3;
    REQUIRE(run_experiment(cfg) == ExitOk);
    CHECK(slurp(cfg.output_dir + "/sweep-M.csv") == a);
    CHECK(slurp(cfg.output_dir + "/sweep-M_summary.csv") == as);
    CHECK(std::count(a.begin(), a.end(), '\n') == 1 + 2 * 2 * 3);
}

TEST_CASE("infeasible everywhere has its own exit code")
{
    ExperimentConfig cfg = default_config(Scenario::Optimize);
    cfg.system.M = 6;
    cfg.system.K = 3;
    cfg.realizations = 2;
    cfg.targets.kind = TargetSpec::Kind::Uniform;
    cfg.targets.value = 40.0;
    cfg.output_dir = temp_dir("infeasible");
    ExperimentResult res;
    CHECK(run_experiment(cfg, &res) == ExitInfeasibleEverywhere);
    for (const ResultRow& r : res.rows) {
        if (r.method == "sca") {
            CHECK(r.ee == 0.0);
            CHECK(r.status == "infeasible");
        }
    }
    for (const SummaryRow& s : res.summary) {
        if (s.method == "sca") CHECK(s.feasible_fraction == 0.0);
    }
}

TEST_CASE("selection and colocated scenarios produce their methods")
{
    ExperimentConfig cfg = default_config(Scenario::CompareColocated);
    cfg.system.K = 4;
    cfg.total_antennas = 16;
    cfg.sweep_N = {2, 4};
    cfg.realizations = 1;
    cfg.targets.value = 0.5;
    ExperimentResult res = compute_experiment(cfg);
    REQUIRE(res.rows.size() == 3);
    CHECK(res.rows[0].method == "received_power");
    CHECK(res.rows[0].M == 8);
    CHECK(res.rows[1].N == 4);
    CHECK(res.rows[2].method == "colocated");
    CHECK(res.rows[2].M == 1);
    CHECK(res.rows[2].N == 16);

    ExperimentConfig sel = default_config(Scenario::Select);
    sel.system.M = 12;
    sel.system.K = 3;
    sel.system.tau_p = 3;
    sel.targets.value = 0.3;
    sel.realizations = 1;
    ExperimentResult r2 = compute_experiment(sel);
    REQUIRE(r2.rows.size() == 3);
    CHECK(r2.rows[0].method == "sca_full");
    CHECK(r2.rows[1].method == "received_power");
    CHECK(r2.rows[2].method == "largest_beta");
    CHECK(r2.rows[1].serving_fraction <= 1.0);
    CHECK(r2.rows[0].serving_fraction == 1.0);
}
