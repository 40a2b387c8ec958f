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
// Command-line front end: one subcommand per scenario.
#include "cfmimo/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace cfmimo;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> realizations;
    std::optional<std::string> out;
    std::optional<int> workers;
    bool quiet = false;
};

int execute(Scenario scenario, const Flags& f)
{
    ExperimentConfig cfg;
    try {
        if (f.config.empty()) {
            cfg = default_config(scenario);
        } else {
            cfg = load_config(f.config);
            if (cfg.scenario != scenario) {
                // The subcommand wins; keep everything else from the file.
                nlohmann::json j = to_json(cfg);
                j["scenario"] = to_string(scenario);
                cfg = parse_config(j);
            }
        }
        if (f.seed) cfg.system.seed = *f.seed;
        if (f.realizations) cfg.realizations = *f.realizations;
        if (f.out) cfg.output_dir = *f.out;
        if (f.workers) cfg.workers = *f.workers;
        cfg.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ExitConfigError;
    }

    ExperimentResult res;
    int code = 0;
    try {
        code = run_experiment(cfg, &res, f.quiet ? nullptr : &std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitSolverFailure;
    }
    for (const std::string& p : res.files) std::cout << p << '\n';
    if (code == ExitSolverFailure) {
        std::cerr << res.solver_failures << " run(s) ended in a solver failure\n";
    } else if (code == ExitInfeasibleEverywhere) {
        std::cerr << "targets infeasible in every realization\n";
    }
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy-efficiency power control for cell-free massive MIMO"};
    app.require_subcommand(1);
    Flags flags;
    std::optional<Scenario> chosen;

    auto* dump = app.add_subcommand("default-config", "Print the default config of a scenario as JSON");
    std::string dump_name = "optimize";
    dump->add_option("scenario", dump_name, "Scenario name")->check(CLI::IsMember(scenario_names()));

    for (const std::string& name : scenario_names()) {
        auto* sub = app.add_subcommand(name, "Run the " + name + " scenario");
        sub->add_option("--config", flags.config, "JSON config file (defaults apply when omitted)");
        sub->add_option("--seed", flags.seed, "Master seed, overrides the config");
        sub->add_option("--realizations", flags.realizations, "Number of large-scale realizations");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--workers", flags.workers, "Worker threads");
        sub->add_flag("--quiet", flags.quiet, "No progress log on stderr");
        sub->callback([&chosen, name] { chosen = parse_scenario(name); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ExitConfigError;
    }

    if (dump->parsed()) {
        std::cout << to_json(default_config(parse_scenario(dump_name))).dump(2) << '\n';
        return 0;
    }
    return execute(*chosen, flags);
}
