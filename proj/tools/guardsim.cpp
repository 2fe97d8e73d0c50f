/**
 * Copyright The guardsim Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "guardsim/harness/matrix.hpp"
#include "guardsim/harness/scenario.hpp"

using namespace guardsim;
using namespace guardsim::harness;

namespace {

constexpr int exit_config = 2;
constexpr int exit_errored = 3;

int config_error(const ConfigError& e)
{
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
}

int run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out,
        const std::string& trace_path)
{
    auto j = load_json_file(path);
    if (!j)
        return config_error(j.error());
    auto cfg = parse_scenario_config(*j);
    if (!cfg)
        return config_error(cfg.error());
    if (seed)
        cfg->seed = *seed;

    auto sw = build_scenario(*cfg, !trace_path.empty());
    if (!sw)
        return config_error(sw.error());
    ScenarioReport r;
    try {
        (*sw)->run();
        r = summarize(**sw);
    } catch (const std::exception& e) {
        r.name = cfg->label();
        r.scenario = cfg->scenario;
        r.seed = cfg->seed;
        r.error = e.what();
    }
    if (!trace_path.empty()) {
        std::ofstream t(trace_path);
        if (!t) {
            std::cerr << "cannot write " << trace_path << "\n";
            return 1;
        }
        (*sw)->world.trace().write_jsonl(t);
    }
    if (out == "json")
        std::cout << to_json(r).dump(2) << "\n";
    else if (out == "csv")
        std::cout << to_csv({r});
    else
        std::cout << to_markdown(r);
    return r.error ? exit_errored : 0;
}

int matrix(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out, unsigned threads)
{
    auto j = load_json_file(path);
    if (!j)
        return config_error(j.error());
    auto m = parse_matrix_config(*j);
    if (!m)
        return config_error(m.error());
    if (seed)
        m->base.seed = *seed;
    auto report = run_matrix(m->cells(), threads);
    if (out == "json") {
        std::cout << to_json(report).dump(2) << "\n";
    } else if (out == "csv") {
        std::cout << to_csv(report.cells);
    } else {
        std::cout << to_markdown(report);
    }
    return report.any_errored() ? exit_errored : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Guard proxy scenarios for constrained CoAP networks"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "markdown";
    std::string trace;
    unsigned threads = 0;

    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    run_cmd->add_option("--config", config, "Scenario config (JSON)")->required();
    run_cmd->add_option("--seed", seed, "Override the config seed");
    run_cmd->add_option("--out", out, "Report format")->check(CLI::IsMember({"json", "csv", "markdown"}));
    run_cmd->add_option("--trace", trace, "Write the event trace as JSON lines");

    auto* matrix_cmd = app.add_subcommand("matrix", "Run every scenario under every attack");
    matrix_cmd->add_option("--config", config, "Matrix config (JSON)")->required();
    matrix_cmd->add_option("--seed", seed, "Override the config seed");
    matrix_cmd->add_option("--out", out, "Report format")->check(CLI::IsMember({"json", "csv", "markdown"}));
    matrix_cmd->add_option("--threads", threads, "Worker threads (0: one per core)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*run_cmd)
        return run(config, seed, out, trace);
    return matrix(config, seed, out, threads);
}
