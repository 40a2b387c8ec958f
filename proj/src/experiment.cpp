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
#include "cfmimo/experiment.hpp"

#include "cfmimo/oracle.hpp"
#include "cfmimo/selection.hpp"
#include "cfmimo/serialize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace cfmimo {

using nlohmann::json;

namespace {

const std::vector<std::pair<Scenario, std::string>>& scenario_table()
{
    static const std::vector<std::pair<Scenario, std::string>> t = {
        {Scenario::ValidateSe, "validate-se"},     {Scenario::Optimize, "optimize"},
        {Scenario::Select, "select"},              {Scenario::SweepM, "sweep-M"},
        {Scenario::SweepN, "sweep-N"},             {Scenario::SweepPbt, "sweep-Pbt"},
        {Scenario::SweepTarget, "sweep-target"},   {Scenario::CompareColocated, "compare-colocated"},
    };
    return t;
}

// Strict reader for one JSON object: every key must be consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    template <class T>
    void read(const std::string& key, T& out)
    {
        if (!has(key)) return;
        const json& v = raw(key);
        try {
            if constexpr (std::is_same_v<T, int> || std::is_same_v<T, long>) {
                if (!v.is_number_integer()) throw ConfigError("");
                out = v.get<T>();
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                    throw ConfigError("");
                }
                out = v.get<T>();
            } else if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError("");
                out = v.get<double>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError("");
                out = v.get<std::string>();
            } else {
                out = v.get<T>();
            }
        } catch (const std::exception&) {
            throw ConfigError(where(key) + ": wrong type (got " + std::string(v.type_name()) + ")");
        }
    }

    template <class T>
    void read_list(const std::string& key, std::vector<T>& out)
    {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected an array");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const bool ok = std::is_integral_v<T> ? v[i].is_number_integer() : v[i].is_number();
            if (!ok) throw ConfigError(where(key) + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<T>());
        }
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) throw ConfigError("config." + field + ": " + what);
}

bool meets(const ChannelStats& stats, const Matrix& c, const std::vector<double>& targets)
{
    return min_se_margin(stats, c, targets) >= -1e-6;
}

ResultRow base_row(const std::string& param, double value, int r, const std::string& method,
                   const ChannelStats& stats)
{
    ResultRow row;
    row.sweep_param = param;
    row.sweep_value = value;
    row.realization = r;
    row.method = method;
    row.M = stats.M();
    row.N = stats.N;
    row.K = stats.K();
    return row;
}

void fill_report(ResultRow& row, const EvalReport& rep)
{
    row.ee = rep.ee;
    row.sum_se = rep.sum_se;
    row.total_power_W = rep.power_breakdown.total_W();
    row.amplifier_W = rep.power_breakdown.amplifier_W;
    row.fixed_W = rep.power_breakdown.fixed_W;
    row.backhaul_traffic_W = rep.power_breakdown.backhaul_traffic_W;
}

// Row for an optimizer output; infeasible runs report EE = 0.
ResultRow optimized_row(ResultRow row, const ChannelStats& stats, const PowerParams& params,
                        const PowerAllocation& alloc, const ScaState& st, double serving_fraction)
{
    row.status = to_string(st.status);
    row.iterations = st.iteration;
    row.serving_fraction = serving_fraction;
    row.feasible = st.has_allocation() && !alloc.infeasible;
    if (row.feasible) fill_report(row, evaluate(stats, params, alloc));
    return row;
}

// Row for a fixed allocation; the EE is reported whether or not the
// targets hold and `feasible` records whether they do.
ResultRow fixed_row(ResultRow row, const ChannelStats& stats, const PowerParams& params,
                    const PowerAllocation& alloc, const std::vector<double>& targets)
{
    row.feasible = meets(stats, alloc.c(), targets);
    row.status = row.feasible ? "meets_targets" : "misses_targets";
    fill_report(row, evaluate(stats, params, alloc));
    return row;
}

struct Task {
    std::string param;
    double value = 0.0;
    int realization = 0;
};

struct TaskOutput {
    std::vector<ResultRow> rows;
    std::vector<ValidationRow> validation;
    int failures = 0;
};

void count_failure(TaskOutput& out, const ScaState& st)
{
    if (st.status == ScaStatus::SolverFailure && !st.has_allocation()) ++out.failures;
}

void run_plain(TaskOutput& out, const ResultRow& proto, const ChannelStats& stats,
               const PowerParams& params, const std::vector<double>& targets, const ScaOptions& opts,
               bool with_baselines)
{
    ScaState st;
    PowerAllocation a = run(stats, params, targets, st, opts);
    count_failure(out, st);
    ResultRow row = proto;
    row.method = "sca";
    out.rows.push_back(optimized_row(row, stats, params, a, st, 1.0));
    if (with_baselines) {
        row.method = "equal_I";
        out.rows.push_back(fixed_row(row, stats, params, equal_power(stats, EqualPowerScheme::I), targets));
        row.method = "equal_II";
        out.rows.push_back(fixed_row(row, stats, params, equal_power(stats, EqualPowerScheme::II), targets));
    }
}

void run_selection(TaskOutput& out, const ResultRow& proto, const ChannelStats& stats,
                   const PowerParams& params, const std::vector<double>& targets,
                   const ScaOptions& opts, double delta, bool with_full, bool with_beta,
                   const std::string& rp_name = "received_power")
{
    SelectionOutcome rp =
        optimize_with_selection(stats, params, targets, SelectionScheme::ReceivedPower, delta, opts);
    count_failure(out, rp.initial_state);
    ResultRow row = proto;
    if (with_full) {
        row.method = "sca_full";
        out.rows.push_back(optimized_row(row, stats, params, rp.initial_alloc, rp.initial_state, 1.0));
    }
    if (rp.initial_state.has_allocation()) count_failure(out, rp.state);
    row.method = rp_name;
    out.rows.push_back(
        optimized_row(row, stats, params, rp.alloc, rp.state, rp.selection.mean_fraction()));
    if (with_beta) {
        SelectionOutcome lb =
            optimize_with_selection(stats, params, targets, SelectionScheme::LargestBeta, delta, opts);
        count_failure(out, lb.state);
        row.method = "largest_beta";
        out.rows.push_back(
            optimized_row(row, stats, params, lb.alloc, lb.state, lb.selection.mean_fraction()));
    }
}

SystemConfig colocated_system(const SystemConfig& sys, int total_antennas)
{
    SystemConfig c = sys;
    c.M = total_antennas;
    c.N = 1;
    return colocated_config(c);
}

TaskOutput run_task(const ExperimentConfig& cfg, const Task& task)
{
    TaskOutput out;
    const ScaOptions opts = cfg.sca_options();
    const int r = task.realization;
    SystemConfig sys = cfg.system;
    PowerSpec power = cfg.power;
    TargetSpec targets = cfg.targets;

    switch (cfg.scenario) {
        case Scenario::ValidateSe: {
            NetworkDraw nd = draw_network(sys, static_cast<std::uint64_t>(r));
            Rng arng = make_stream(sys.seed, static_cast<std::uint64_t>(r), Stream::Allocation);
            Rng mrng = make_stream(sys.seed, static_cast<std::uint64_t>(r), Stream::MonteCarlo);
            PowerAllocation a = random_allocation(nd.stats, arng);
            McEstimate e = mc_sinr(nd.real, nd.pilots, sys, a, cfg.mc_samples, mrng);
            const Vector bu = closed_form_bu(nd.stats, a);
            const Matrix ui = closed_form_ui(nd.stats, a);
            for (int k = 0; k < nd.stats.K(); ++k) {
                ValidationRow v;
                v.realization = r;
                v.user = k;
                v.sinr_closed = sinr_k(nd.stats, a, k);
                v.sinr_mc = e.sinr(k);
                v.rel_gap = std::fabs(v.sinr_mc - v.sinr_closed) / v.sinr_closed;
                v.bu_closed = bu(k);
                v.bu_mc = e.bu_power(k);
                v.bu_se = e.bu_se(k);
                for (int kp = 0; kp < nd.stats.K(); ++kp) {
                    if (kp == k || !(e.ui_se(k, kp) > 0.0)) continue;
                    v.ui_max_abs_z = std::max(v.ui_max_abs_z,
                                              std::fabs(e.ui_power(k, kp) - ui(k, kp)) / e.ui_se(k, kp));
                }
                out.validation.push_back(v);
            }
            return out;
        }
        case Scenario::SweepM: sys.M = static_cast<int>(task.value); break;
        case Scenario::SweepN:
        case Scenario::CompareColocated:
            if (task.param == "colocated") {
                sys = colocated_system(sys, cfg.total_antennas);
            } else {
                sys.N = static_cast<int>(task.value);
                sys.M = cfg.total_antennas / sys.N;
            }
            break;
        case Scenario::SweepPbt: power.p_bt_W_per_Gbps = task.value; break;
        case Scenario::SweepTarget:
            targets.kind = TargetSpec::Kind::Uniform;
            targets.value = task.value;
            if (task.param == "colocated") sys = colocated_system(sys, sys.M * sys.N);
            break;
        default: break;
    }

    NetworkDraw nd = draw_network(sys, static_cast<std::uint64_t>(r));
    const ChannelStats& stats = nd.stats;
    const PowerParams params = power.params(sys);
    const std::vector<double> tg = targets.resolve(stats);
    ResultRow proto = base_row(task.param, task.value, r, "", stats);

    switch (cfg.scenario) {
        case Scenario::Optimize:
        case Scenario::SweepM: run_plain(out, proto, stats, params, tg, opts, true); break;
        case Scenario::Select:
        case Scenario::SweepPbt:
            run_selection(out, proto, stats, params, tg, opts, cfg.delta_pct, true, true);
            break;
        case Scenario::SweepN:
        case Scenario::CompareColocated:
        case Scenario::SweepTarget:
            if (task.param == "colocated") {
                ScaState st;
                PowerAllocation a = run(stats, params, tg, st, opts);
                count_failure(out, st);
                proto.method = "colocated";
                out.rows.push_back(optimized_row(proto, stats, params, a, st, 1.0));
            } else {
                run_selection(out, proto, stats, params, tg, opts, cfg.delta_pct, false, false);
            }
            break;
        default: break;
    }
    return out;
}

std::vector<Task> make_tasks(const ExperimentConfig& cfg)
{
    std::vector<std::pair<std::string, double>> points;
    switch (cfg.scenario) {
        case Scenario::SweepM:
            for (int m : cfg.sweep_M) points.emplace_back("M", m);
            break;
        case Scenario::SweepN:
            for (int n : cfg.sweep_N) points.emplace_back("N", n);
            break;
        case Scenario::CompareColocated:
            for (int n : cfg.sweep_N) points.emplace_back("N", n);
            points.emplace_back("colocated", cfg.total_antennas);
            break;
        case Scenario::SweepPbt:
            for (double p : cfg.sweep_p_bt_W_per_Gbps) points.emplace_back("p_bt_W_per_Gbps", p);
            break;
        case Scenario::SweepTarget:
            for (double t : cfg.sweep_target) points.emplace_back("target_bit_per_s_per_Hz", t);
            for (double t : cfg.sweep_target) points.emplace_back("colocated", t);
            break;
        default: points.emplace_back("none", 0.0); break;
    }
    std::vector<Task> tasks;
    for (const auto& [param, value] : points) {
        for (int r = 0; r < cfg.realizations; ++r) tasks.push_back({param, value, r});
    }
    return tasks;
}

double mean_ee(const std::vector<SummaryRow>& s, const std::string& param, double value,
               const std::string& method, bool& found)
{
    for (const SummaryRow& row : s) {
        if (row.sweep_param == param && row.sweep_value == value && row.method == method) {
            found = true;
            return row.mean_ee;
        }
    }
    found = false;
    return 0.0;
}

ComparisonRow ratio_row(const std::string& name, const std::string& param, double value, double num,
                        double den)
{
    return {name, param, value, num, den, den > 0.0 ? num / den : std::numeric_limits<double>::infinity()};
}

std::vector<ComparisonRow> make_comparisons(const ExperimentConfig& cfg,
                                            const std::vector<SummaryRow>& s)
{
    std::vector<ComparisonRow> out;
    auto add = [&](const std::string& param, double value, const std::string& num,
                   const std::string& den) {
        bool f1 = false, f2 = false;
        double a = mean_ee(s, param, value, num, f1);
        double b = mean_ee(s, param, value, den, f2);
        if (f1 && f2) out.push_back(ratio_row(num + "/" + den, param, value, a, b));
    };
    switch (cfg.scenario) {
        case Scenario::Optimize:
            add("none", 0.0, "sca", "equal_I");
            add("none", 0.0, "sca", "equal_II");
            break;
        case Scenario::SweepM:
            for (int m : cfg.sweep_M) add("M", m, "sca", "equal_II");
            break;
        case Scenario::Select:
            add("none", 0.0, "received_power", "largest_beta");
            add("none", 0.0, "received_power", "sca_full");
            break;
        case Scenario::SweepPbt:
            for (double p : cfg.sweep_p_bt_W_per_Gbps) {
                add("p_bt_W_per_Gbps", p, "received_power", "sca_full");
                add("p_bt_W_per_Gbps", p, "largest_beta", "sca_full");
            }
            break;
        case Scenario::SweepTarget:
            for (double t : cfg.sweep_target) {
                bool f1 = false, f2 = false;
                double a = mean_ee(s, "target_bit_per_s_per_Hz", t, "received_power", f1);
                double b = mean_ee(s, "colocated", t, "colocated", f2);
                if (f1 && f2) out.push_back(ratio_row("cell_free/colocated", "target_bit_per_s_per_Hz", t, a, b));
            }
            break;
        case Scenario::CompareColocated: {
            double best = -1.0;
            int best_n = 0;
            for (int n : cfg.sweep_N) {
                bool f = false;
                double v = mean_ee(s, "N", n, "received_power", f);
                if (f && v > best) {
                    best = v;
                    best_n = n;
                }
            }
            bool f = false;
            double col = mean_ee(s, "colocated", cfg.total_antennas, "colocated", f);
            if (f && best_n > 0) out.push_back(ratio_row("cell_free_best_N/colocated", "N", best_n, best, col));
            break;
        }
        default: break;
    }
    return out;
}

void check_list_positive(const std::vector<double>& v, const std::string& field)
{
    require(!v.empty(), field, "must list at least one value");
    for (double x : v) require(std::isfinite(x) && x >= 0.0, field, "values must be finite and >= 0");
}

}  // namespace

const char* to_string(Scenario s)
{
    for (const auto& [sc, name] : scenario_table()) {
        if (sc == s) return name.c_str();
    }
    return "unknown";
}

Scenario parse_scenario(const std::string& name)
{
    for (const auto& [sc, n] : scenario_table()) {
        if (n == name) return sc;
    }
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& p : scenario_table()) v.push_back(p.second);
        return v;
    }();
    return names;
}

std::vector<double> TargetSpec::resolve(const ChannelStats& stats) const
{
    const int K = stats.K();
    std::vector<double> t(K, value);
    if (kind == Kind::PerUser) {
        if (static_cast<int>(per_user.size()) != K) {
            throw ConfigError("config.targets.values_bit_per_s_per_Hz: expected " + std::to_string(K) +
                              " entries");
        }
        t = per_user;
    } else if (kind == Kind::MatchSchemeII) {
        const PowerAllocation a = equal_power(stats, EqualPowerScheme::II);
        for (int k = 0; k < K; ++k) t[k] = se_k(stats, a, k);
    }
    return t;
}

PowerParams PowerSpec::params(const SystemConfig& cfg) const
{
    return PowerParams::uniform(cfg.M, cfg, amplifier_efficiency, p_tc_W, p_0_W, p_bt_W_per_Gbps);
}

ScaOptions ExperimentConfig::sca_options() const
{
    ScaOptions o;
    o.eps = sca_eps;
    o.max_iter = sca_max_iter;
    return o;
}

void ExperimentConfig::validate() const
{
    try {
        system.validate();
    } catch (const std::invalid_argument& e) {
        // Translate the struct field names to the config keys.
        static const std::map<std::string, std::string> keys = {
            {"D_km", "area_side_km"},
            {"bandwidth_Hz", "bandwidth_MHz"},
            {"sigma_sh_dB", "shadowing_std_dB"},
            {"L_dB", "path_loss_L_dB"},
        };
        std::string msg = e.what();
        if (msg.rfind("system.", 0) == 0) msg = msg.substr(7);
        const std::size_t colon = msg.find(':');
        std::string field = msg.substr(0, colon);
        if (auto it = keys.find(field); it != keys.end()) field = it->second;
        throw ConfigError("config.system." + field + (colon == std::string::npos ? "" : msg.substr(colon)));
    }
    require(realizations >= 1, "realizations", "must be >= 1");
    require(workers >= 1, "workers", "must be >= 1");
    require(!output_dir.empty(), "output_dir", "must not be empty");
    require(delta_pct > 0.0 && delta_pct <= 100.0, "selection.delta_pct", "must be in (0, 100]");
    require(sca_eps > 0.0, "sca.eps", "must be > 0");
    require(sca_max_iter >= 1, "sca.max_iter", "must be >= 1");
    require(mc_samples >= 2, "validate_se.mc_samples", "must be >= 2");
    require(power.amplifier_efficiency > 0.0 && power.amplifier_efficiency <= 1.0,
            "power.amplifier_efficiency", "must be in (0, 1]");
    require(power.p_tc_W >= 0.0, "power.p_tc_W", "must be >= 0");
    require(power.p_0_W >= 0.0, "power.p_0_W", "must be >= 0");
    require(power.p_bt_W_per_Gbps >= 0.0, "power.p_bt_W_per_Gbps", "must be >= 0");
    if (targets.kind == TargetSpec::Kind::Uniform) {
        require(std::isfinite(targets.value) && targets.value >= 0.0, "targets.value_bit_per_s_per_Hz",
                "must be finite and >= 0");
    } else if (targets.kind == TargetSpec::Kind::PerUser) {
        require(static_cast<int>(targets.per_user.size()) == system.K, "targets.values_bit_per_s_per_Hz",
                "expected one entry per user (K = " + std::to_string(system.K) + ")");
        for (double t : targets.per_user) {
            require(std::isfinite(t) && t >= 0.0, "targets.values_bit_per_s_per_Hz", "entries must be >= 0");
        }
    }
    switch (scenario) {
        case Scenario::SweepM:
            require(!sweep_M.empty(), "sweep.M", "required for sweep-M");
            for (int m : sweep_M) require(m >= 1, "sweep.M", "values must be >= 1");
            break;
        case Scenario::SweepN:
        case Scenario::CompareColocated:
            require(!sweep_N.empty(), "sweep.N", "required for this scenario");
            require(total_antennas >= 1, "sweep.total_antennas", "must be >= 1");
            for (int n : sweep_N) {
                require(n >= 1 && total_antennas % n == 0, "sweep.N",
                        "values must divide total_antennas = " + std::to_string(total_antennas));
            }
            break;
        case Scenario::SweepPbt: check_list_positive(sweep_p_bt_W_per_Gbps, "sweep.p_bt_W_per_Gbps"); break;
        case Scenario::SweepTarget: check_list_positive(sweep_target, "sweep.target_bit_per_s_per_Hz"); break;
        default: break;
    }
}

ExperimentConfig parse_config(const json& doc)
{
    ExperimentConfig cfg;
    Section top(doc, "config");
    if (top.has("scenario")) {
        std::string s;
        top.read("scenario", s);
        try {
            cfg.scenario = parse_scenario(s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config.scenario: ") + e.what());
        }
    }
    cfg = default_config(cfg.scenario);
    top.read("realizations", cfg.realizations);
    top.read("workers", cfg.workers);
    top.read("seed", cfg.system.seed);
    top.read("output_dir", cfg.output_dir);

    if (top.has("system")) {
        Section s(top.raw("system"), "config.system");
        SystemConfig& y = cfg.system;
        s.read("M", y.M);
        s.read("K", y.K);
        s.read("N", y.N);
        s.read("tau_c", y.tau_c);
        s.read("tau_p", y.tau_p);
        s.read("area_side_km", y.D_km);
        s.read("rho_d_W", y.rho_d_W);
        s.read("rho_p_W", y.rho_p_W);
        double mhz = y.bandwidth_Hz / 1e6;
        s.read("bandwidth_MHz", mhz);
        y.bandwidth_Hz = mhz * 1e6;
        s.read("noise_figure_dB", y.noise_figure_dB);
        s.read("shadowing_std_dB", y.sigma_sh_dB);
        s.read("d0_km", y.d0_km);
        s.read("d1_km", y.d1_km);
        s.read("path_loss_L_dB", y.L_dB);
        s.finish();
    }
    if (top.has("power")) {
        Section s(top.raw("power"), "config.power");
        s.read("amplifier_efficiency", cfg.power.amplifier_efficiency);
        s.read("p_tc_W", cfg.power.p_tc_W);
        s.read("p_0_W", cfg.power.p_0_W);
        s.read("p_bt_W_per_Gbps", cfg.power.p_bt_W_per_Gbps);
        s.finish();
    }
    if (top.has("targets")) {
        Section s(top.raw("targets"), "config.targets");
        std::string kind = "match-scheme-II";
        s.read("kind", kind);
        if (kind == "uniform") {
            cfg.targets.kind = TargetSpec::Kind::Uniform;
            if (!s.has("value_bit_per_s_per_Hz")) {
                throw ConfigError("config.targets.value_bit_per_s_per_Hz: required for kind 'uniform'");
            }
            s.read("value_bit_per_s_per_Hz", cfg.targets.value);
        } else if (kind == "per-user") {
            cfg.targets.kind = TargetSpec::Kind::PerUser;
            if (!s.has("values_bit_per_s_per_Hz")) {
                throw ConfigError("config.targets.values_bit_per_s_per_Hz: required for kind 'per-user'");
            }
            s.read_list("values_bit_per_s_per_Hz", cfg.targets.per_user);
        } else if (kind == "match-scheme-II") {
            cfg.targets.kind = TargetSpec::Kind::MatchSchemeII;
        } else {
            throw ConfigError("config.targets.kind: expected uniform, per-user or match-scheme-II");
        }
        s.finish();
    }
    if (top.has("selection")) {
        Section s(top.raw("selection"), "config.selection");
        s.read("delta_pct", cfg.delta_pct);
        s.finish();
    }
    if (top.has("sca")) {
        Section s(top.raw("sca"), "config.sca");
        s.read("eps", cfg.sca_eps);
        s.read("max_iter", cfg.sca_max_iter);
        s.finish();
    }
    if (top.has("validate_se")) {
        Section s(top.raw("validate_se"), "config.validate_se");
        s.read("mc_samples", cfg.mc_samples);
        s.finish();
    }
    if (top.has("sweep")) {
        Section s(top.raw("sweep"), "config.sweep");
        s.read_list("M", cfg.sweep_M);
        s.read_list("N", cfg.sweep_N);
        s.read("total_antennas", cfg.total_antennas);
        s.read_list("p_bt_W_per_Gbps", cfg.sweep_p_bt_W_per_Gbps);
        s.read_list("target_bit_per_s_per_Hz", cfg.sweep_target);
        s.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c)
{
    json j;
    j["scenario"] = to_string(c.scenario);
    j["realizations"] = c.realizations;
    j["workers"] = c.workers;
    j["seed"] = c.system.seed;
    j["output_dir"] = c.output_dir;
    const SystemConfig& y = c.system;
    j["system"] = {{"M", y.M},
                   {"K", y.K},
                   {"N", y.N},
                   {"tau_c", y.tau_c},
                   {"tau_p", y.tau_p},
                   {"area_side_km", y.D_km},
                   {"rho_d_W", y.rho_d_W},
                   {"rho_p_W", y.rho_p_W},
                   {"bandwidth_MHz", y.bandwidth_Hz / 1e6},
                   {"noise_figure_dB", y.noise_figure_dB},
                   {"shadowing_std_dB", y.sigma_sh_dB},
                   {"d0_km", y.d0_km},
                   {"d1_km", y.d1_km},
                   {"path_loss_L_dB", y.L_dB}};
    j["power"] = {{"amplifier_efficiency", c.power.amplifier_efficiency},
                  {"p_tc_W", c.power.p_tc_W},
                  {"p_0_W", c.power.p_0_W},
                  {"p_bt_W_per_Gbps", c.power.p_bt_W_per_Gbps}};
    switch (c.targets.kind) {
        case TargetSpec::Kind::Uniform:
            j["targets"] = {{"kind", "uniform"}, {"value_bit_per_s_per_Hz", c.targets.value}};
            break;
        case TargetSpec::Kind::PerUser:
            j["targets"] = {{"kind", "per-user"}, {"values_bit_per_s_per_Hz", c.targets.per_user}};
            break;
        case TargetSpec::Kind::MatchSchemeII: j["targets"] = {{"kind", "match-scheme-II"}}; break;
    }
    j["selection"] = {{"delta_pct", c.delta_pct}};
    j["sca"] = {{"eps", c.sca_eps}, {"max_iter", c.sca_max_iter}};
    j["validate_se"] = {{"mc_samples", c.mc_samples}};
    j["sweep"] = {{"M", c.sweep_M},
                  {"N", c.sweep_N},
                  {"total_antennas", c.total_antennas},
                  {"p_bt_W_per_Gbps", c.sweep_p_bt_W_per_Gbps},
                  {"target_bit_per_s_per_Hz", c.sweep_target}};
    return j;
}

ExperimentConfig default_config(Scenario s)
{
    ExperimentConfig c;
    c.scenario = s;
    c.realizations = 20;
    c.sweep_M = {20, 40, 60, 80, 100};
    c.sweep_N = {1, 2, 4, 8, 16};
    c.total_antennas = 256;
    c.sweep_p_bt_W_per_Gbps = {0.025, 0.25, 2.5};
    c.sweep_target = {0.5, 1.0, 1.5};
    switch (s) {
        case Scenario::ValidateSe:
            c.system.M = 20;
            c.system.K = 4;
            c.system.N = 2;
            c.system.tau_p = 2;
            c.realizations = 10;
            break;
        case Scenario::Select:
        case Scenario::SweepPbt:
        case Scenario::SweepN:
            c.system.K = 40;
            c.system.tau_p = 40;
            c.targets.kind = TargetSpec::Kind::Uniform;
            c.targets.value = 1.0;
            break;
        case Scenario::CompareColocated:
        case Scenario::SweepTarget:
            c.system.K = 20;
            c.system.tau_p = 40;
            c.targets.kind = TargetSpec::Kind::Uniform;
            c.targets.value = 1.0;
            break;
        default: break;
    }
    return c;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows)
{
    // Group in first-appearance order.
    std::vector<SummaryRow> out;
    std::map<std::tuple<std::string, double, std::string>, std::size_t> index;
    std::vector<int> feasible;
    for (const ResultRow& r : rows) {
        auto key = std::make_tuple(r.sweep_param, r.sweep_value, r.method);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.size()).first;
            SummaryRow s;
            s.sweep_param = r.sweep_param;
            s.sweep_value = r.sweep_value;
            s.method = r.method;
            out.push_back(s);
            feasible.push_back(0);
        }
        SummaryRow& s = out[it->second];
        s.realizations++;
        feasible[it->second] += r.feasible ? 1 : 0;
        s.mean_ee += r.ee;
        s.mean_sum_se += r.sum_se;
        s.mean_total_power_W += r.total_power_W;
        s.mean_serving_fraction += r.serving_fraction;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double n = out[i].realizations;
        out[i].feasible_fraction = feasible[i] / n;
        out[i].mean_ee /= n;
        out[i].mean_sum_se /= n;
        out[i].mean_total_power_W /= n;
        out[i].mean_serving_fraction /= n;
    }
    return out;
}

ExperimentResult compute_experiment(const ExperimentConfig& cfg, std::ostream* log)
{
    cfg.validate();
    const std::vector<Task> tasks = make_tasks(cfg);
    std::vector<TaskOutput> outputs(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                outputs[i] = run_task(cfg, tasks[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            if (log) {
                const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                std::lock_guard<std::mutex> lock(log_mutex);
                *log << to_string(cfg.scenario) << ": " << tasks[i].param << '=' << tasks[i].value
                     << " realization " << tasks[i].realization << " done in " << dt << " s\n";
                log->flush();
            }
        }
    };
    const int nthreads = std::min<int>(cfg.workers, static_cast<int>(tasks.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ExperimentResult res;
    for (TaskOutput& o : outputs) {
        res.rows.insert(res.rows.end(), o.rows.begin(), o.rows.end());
        res.validation.insert(res.validation.end(), o.validation.begin(), o.validation.end());
        res.solver_failures += o.failures;
    }
    res.summary = summarize(res.rows);
    res.comparisons = make_comparisons(cfg, res.summary);
    for (const ResultRow& r : res.rows) {
        if (r.feasible && r.method != "equal_I" && r.method != "equal_II") res.any_feasible = true;
    }
    if (cfg.scenario == Scenario::ValidateSe) res.any_feasible = true;
    return res;
}

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows)
{
    os << "sweep_param,sweep_value,realization,method,M,N,K,status,feasible,iterations,"
          "ee_bit_per_J,sum_se_bit_per_s_per_Hz,total_power_W,amplifier_W,fixed_W,"
          "backhaul_traffic_W,serving_fraction\n";
    for (const ResultRow& r : rows) {
        os << r.sweep_param << ',' << format_double(r.sweep_value) << ',' << r.realization << ','
           << r.method << ',' << r.M << ',' << r.N << ',' << r.K << ',' << r.status << ','
           << (r.feasible ? 1 : 0) << ',' << r.iterations << ',' << format_double(r.ee) << ','
           << format_double(r.sum_se) << ',' << format_double(r.total_power_W) << ','
           << format_double(r.amplifier_W) << ',' << format_double(r.fixed_W) << ','
           << format_double(r.backhaul_traffic_W) << ',' << format_double(r.serving_fraction) << '\n';
    }
}

void write_validation_csv(std::ostream& os, const std::vector<ValidationRow>& rows)
{
    os << "realization,user,sinr_closed,sinr_mc,rel_gap,bu_closed,bu_mc,bu_se,ui_max_abs_z\n";
    for (const ValidationRow& v : rows) {
        os << v.realization << ',' << v.user << ',' << format_double(v.sinr_closed) << ','
           << format_double(v.sinr_mc) << ',' << format_double(v.rel_gap) << ','
           << format_double(v.bu_closed) << ',' << format_double(v.bu_mc) << ','
           << format_double(v.bu_se) << ',' << format_double(v.ui_max_abs_z) << '\n';
    }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows)
{
    os << "sweep_param,sweep_value,method,realizations,feasible_fraction,mean_ee_bit_per_J,"
          "mean_sum_se_bit_per_s_per_Hz,mean_total_power_W,mean_serving_fraction\n";
    for (const SummaryRow& s : rows) {
        os << s.sweep_param << ',' << format_double(s.sweep_value) << ',' << s.method << ','
           << s.realizations << ',' << format_double(s.feasible_fraction) << ','
           << format_double(s.mean_ee) << ',' << format_double(s.mean_sum_se) << ','
           << format_double(s.mean_total_power_W) << ',' << format_double(s.mean_serving_fraction)
           << '\n';
    }
}

void write_comparisons_csv(std::ostream& os, const std::vector<ComparisonRow>& rows)
{
    os << "comparison,sweep_param,sweep_value,numerator_mean_ee,denominator_mean_ee,ratio\n";
    for (const ComparisonRow& c : rows) {
        os << c.comparison << ',' << c.sweep_param << ',' << format_double(c.sweep_value) << ','
           << format_double(c.numerator) << ',' << format_double(c.denominator) << ','
           << format_double(c.ratio) << '\n';
    }
}

int run_experiment(const ExperimentConfig& cfg, ExperimentResult* result, std::ostream* log)
{
    ExperimentResult res = compute_experiment(cfg, log);
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const std::string base = (fs::path(cfg.output_dir) / to_string(cfg.scenario)).string();
    auto write = [&](const std::string& path, const std::function<void(std::ostream&)>& fn) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error(path + ": cannot write");
        fn(os);
        res.files.push_back(path);
    };
    if (cfg.scenario == Scenario::ValidateSe) {
        write(base + ".csv", [&](std::ostream& os) { write_validation_csv(os, res.validation); });
        write(base + "_summary.csv", [&](std::ostream& os) {
            double gap = 0.0, bz = 0.0, uz = 0.0;
            for (const ValidationRow& v : res.validation) {
                gap = std::max(gap, v.rel_gap);
                if (v.bu_se > 0.0) bz = std::max(bz, std::fabs(v.bu_mc - v.bu_closed) / v.bu_se);
                uz = std::max(uz, v.ui_max_abs_z);
            }
            os << "samples,rows,max_rel_gap,max_bu_abs_z,max_ui_abs_z\n"
               << cfg.mc_samples << ',' << res.validation.size() << ',' << format_double(gap) << ','
               << format_double(bz) << ',' << format_double(uz) << '\n';
        });
    } else {
        write(base + ".csv", [&](std::ostream& os) { write_rows_csv(os, res.rows); });
        write(base + "_summary.csv", [&](std::ostream& os) { write_summary_csv(os, res.summary); });
        write(base + "_comparisons.csv",
              [&](std::ostream& os) { write_comparisons_csv(os, res.comparisons); });
    }
    int code = ExitOk;
    if (res.solver_failures > 0) {
        code = ExitSolverFailure;
    } else if (!res.any_feasible) {
        code = ExitInfeasibleEverywhere;
    }
    if (result) *result = std::move(res);
    return code;
}

}  // namespace cfmimo
