// SPDX-License-Identifier: Apache-2.0
//
// tilecast: minimum-power multicast transmission of tiled 360 video
// Copyright (C) 2026 The tilecast authors
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

// tilecast command line: run experiments, cross-check the allocator, re-verify result files.

#include "tilecast/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace tilecast;

namespace {

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::vector<std::string> schemes;
    std::string sweep;
};

void add_common(CLI::App *cmd, Common &c)
{
    cmd->add_option("--config", c.config, "JSON scenario config (keys mirror ScenarioConfig)");
    cmd->add_option("--seed", c.seed, "base seed (overrides the config)");
    cmd->add_option("--trials", c.trials, "trials per sweep point (overrides the config)")->check(CLI::PositiveNumber);
    cmd->add_option("--scheme", c.schemes, "scheme to run; repeat for several")
        ->check(CLI::IsMember({"proposed-asymptotic", "proposed-dc", "baseline-1", "baseline-2"}));
    cmd->add_option("--sweep", c.sweep, "sweep parameter")->check(CLI::IsMember({"k", "m", "delta"}));
}

ScenarioConfig resolve(const Common &c)
{
    SweepParam sweep = c.sweep.empty() ? SweepParam::kNone : parse_sweep(c.sweep);
    ScenarioConfig cfg = c.config.empty() ? default_config(sweep) : load_config(c.config);
    if (!c.config.empty() && sweep != SweepParam::kNone && sweep != cfg.sweep)
    {
        cfg.sweep = sweep;
        cfg.sweep_values = default_sweep_values(sweep);
    }
    if (c.seed)
        cfg.base_seed = *c.seed;
    if (c.trials)
        cfg.trials = *c.trials;
    if (!c.schemes.empty())
    {
        cfg.schemes.clear();
        for (const auto &s : c.schemes)
            if (std::find(cfg.schemes.begin(), cfg.schemes.end(), parse_scheme(s)) == cfg.schemes.end())
                cfg.schemes.push_back(parse_scheme(s));
    }
    cfg.validate();
    return cfg;
}

int cmd_run(const Common &c, const std::string &out, unsigned threads, bool dump)
{
    const ScenarioConfig cfg = resolve(c);
    if (dump)
    {
        std::cout << config_to_json(cfg) << '\n';
        return 0;
    }
    if (out.empty() || out == "-")
    {
        write_csv(std::cout, cfg, run_all(cfg, threads));
        return 0;
    }
    run_experiment(cfg, out, threads);
    std::cerr << "wrote " << out << '\n';
    return 0;
}

int cmd_oracle(std::uint64_t seed, int count, const std::string &out, double gap_tol)
{
    std::ofstream file;
    std::ostream *os = &std::cout;
    if (!out.empty() && out != "-")
    {
        file.open(out);
        if (!file)
            throw std::runtime_error("cannot write " + out);
        os = &file;
    }
    *os << "case,n_sc,messages,solver_power_w,oracle_power_w,rel_gap,audit_ok\n";
    int bad = 0;
    double worst = 0.0;
    for (int i = 0; i < count; ++i)
    {
        const auto oc = random_oracle_case(splitmix64_mix(seed + static_cast<std::uint64_t>(i)));
        const auto r = check_oracle_case(oc);
        *os << i << ',' << oc.n_sc << ',' << oc.demands.size() << ',';
        if (r.feasible)
            *os << format_double(r.solver_power) << ',' << format_double(r.oracle_power) << ','
                << format_double(r.rel_gap);
        else
            *os << "inf,inf,0";
        *os << ',' << (r.audit_ok && r.agree ? 1 : 0) << '\n';
        worst = std::max(worst, r.rel_gap);
        if (!r.agree || !r.audit_ok || r.rel_gap > gap_tol)
            ++bad;
    }
    std::cerr << count << " cases, worst relative gap " << format_double(worst) << ", " << bad << " failing\n";
    return bad == 0 ? 0 : 1;
}

int cmd_audit(const Common &c, const std::string &file, std::size_t recheck)
{
    std::ifstream in(file);
    if (!in)
        throw std::runtime_error("cannot read " + file);
    std::optional<ScenarioConfig> cfg;
    if (!c.config.empty() || !c.sweep.empty() || c.seed || c.trials || !c.schemes.empty())
        cfg = resolve(c);
    const CsvAudit a = audit_csv(in, cfg ? &*cfg : nullptr, cfg ? recheck : 0);
    for (const auto &p : a.problems)
        std::cout << p << '\n';
    std::cout << (a.ok() ? "ok" : "FAILED") << ": " << a.trial_rows << " trial rows, " << a.summary_rows
              << " summary rows, " << a.rechecked << " recomputed\n";
    return a.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"tilecast: power-minimal multicast of tiled 360-degree video over MIMO-OFDMA"};
    app.require_subcommand(1);

    Common run_opts;
    std::string run_out;
    unsigned threads = 0;
    bool dump = false;
    auto *run = app.add_subcommand("run", "run a Monte-Carlo experiment and write CSV");
    add_common(run, run_opts);
    run->add_option("--out", run_out, "CSV path ('-' or omitted: stdout)");
    run->add_option("--threads", threads, "worker threads (0: hardware concurrency)");
    run->add_flag("--dump-config", dump, "print the effective config as JSON and exit");

    std::uint64_t oracle_seed = 1;
    int oracle_trials = 50;
    std::string oracle_out;
    double gap_tol = 1e-3;
    auto *oracle = app.add_subcommand("oracle-check", "compare the allocator with exhaustive search on small instances");
    oracle->add_option("--seed", oracle_seed, "seed for the random instances");
    oracle->add_option("--trials", oracle_trials, "number of instances")->check(CLI::PositiveNumber);
    oracle->add_option("--out", oracle_out, "per-case CSV path ('-' or omitted: stdout)");
    oracle->add_option("--gap-tol", gap_tol, "largest acceptable relative power gap");

    Common audit_opts;
    std::string audit_file;
    std::size_t recheck = 2;
    auto *audit = app.add_subcommand("audit", "re-verify a results CSV");
    add_common(audit, audit_opts);
    audit->add_option("--out,file", audit_file, "results CSV to verify")->required();
    audit->add_option("--recheck", recheck, "trials per group to recompute when a config is given");

    CLI11_PARSE(app, argc, argv);
    try
    {
        if (run->parsed())
            return cmd_run(run_opts, run_out, threads, dump);
        if (oracle->parsed())
            return cmd_oracle(oracle_seed, oracle_trials, oracle_out, gap_tol);
        return cmd_audit(audit_opts, audit_file, recheck);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
