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

#include "tilecast/harness.hpp"

#include "tilecast/audit.hpp"
#include "tilecast/dc_solver.hpp"
#include "tilecast/ofdma_alloc.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace tilecast {

namespace {

constexpr std::uint64_t kDcStartStream = 0x64632d7374617274ULL;

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

bool parse_u64(const std::string &s, std::uint64_t &out)
{
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        return false;
    try
    {
        std::size_t pos = 0;
        out = std::stoull(s, &pos);
        return pos == s.size();
    }
    catch (const std::exception &)
    {
        return false;
    }
}

bool parse_real(const std::string &s, double &out)
{
    if (s.empty())
        return false;
    char *end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

} // namespace

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

TrialInstance build_instance(const ScenarioConfig &cfg, double sweep_value, std::size_t trial)
{
    TrialInstance inst;
    inst.seed = derive_trial_seed(cfg.base_seed, trial);
    inst.scenario = scenario_for(cfg, sweep_value, inst.seed);
    for (const auto &d : inst.scenario.dirs)
        inst.tile_sets.push_back(compute_tile_set(d, cfg.tiling));
    inst.messages = build_messages(build_partition(inst.tile_sets), inst.scenario.qualities, cfg.ladder);
    inst.unicast = unicast_messages(inst.tile_sets, inst.scenario.qualities, cfg.ladder);

    ChannelSpec spec;
    spec.m = inst.scenario.m;
    spec.n_sc = cfg.n_sc;
    spec.k_users = inst.scenario.dirs.size();
    spec.beta = inst.scenario.beta;
    spec.noise_w = cfg.noise_w;
    spec.bandwidth_hz = cfg.bandwidth_hz;
    inst.channel = sample_channel(inst.seed, spec);
    return inst;
}

TrialResult run_scheme(const ScenarioConfig &cfg, const TrialInstance &inst, Scheme scheme, double sweep_value,
                       std::size_t trial)
{
    TrialResult r;
    r.scheme = scheme;
    r.sweep_value = sweep_value;
    r.trial = trial;
    r.seed = inst.seed;

    const auto &msgs = scheme == Scheme::kBaseline1 ? inst.unicast : inst.messages;
    Allocation plan;
    try
    {
        switch (scheme)
        {
        case Scheme::kProposedAsymptotic:
            plan = solve_fixed_beams(inst.channel, msgs, BeamRule::kAsymptotic);
            break;
        case Scheme::kBaseline1:
            plan = solve_fixed_beams(inst.channel, msgs, BeamRule::kMrtUnicast);
            break;
        case Scheme::kBaseline2:
            plan = solve_fixed_beams(inst.channel, msgs, cfg.baseline2_beam);
            break;
        case Scheme::kProposedDc: {
            DcOptions opt;
            opt.start = cfg.dc_start;
            opt.random_seed = splitmix64_mix(inst.seed ^ kDcStartStream);
            plan = dc_solve(inst.channel, msgs, opt).allocation;
            break;
        }
        }
    }
    catch (const InfeasibleInstance &)
    {
        r.total_power_w = std::numeric_limits<double>::infinity();
        return r;
    }

    if (!audit_allocation(plan, inst.channel, msgs).ok())
    {
        r.total_power_w = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    r.total_power_w = plan.total_power_w;
    r.converged = plan.converged;
    r.unique_argmax = plan.unique_argmax;
    r.iterations = plan.iterations;
    return r;
}

TrialResult run_trial(const ScenarioConfig &cfg, Scheme scheme, double sweep_value, std::size_t trial)
{
    return run_scheme(cfg, build_instance(cfg, sweep_value, trial), scheme, sweep_value, trial);
}

std::vector<double> sweep_points(const ScenarioConfig &cfg)
{
    if (cfg.sweep == SweepParam::kNone)
        return {0.0};
    return cfg.sweep_values;
}

std::vector<TrialResult> run_all(const ScenarioConfig &cfg, unsigned threads)
{
    cfg.validate();
    const auto points = sweep_points(cfg);
    const std::size_t n_schemes = cfg.schemes.size();
    const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
    std::vector<TrialResult> results(points.size() * n_schemes * n_trials);

    // one job per (sweep point, trial); every scheme of a job shares its channel draw
    const std::size_t jobs = points.size() * n_trials;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++)
        {
            const std::size_t p = job / n_trials;
            const std::size_t t = job % n_trials;
            try
            {
                const auto inst = build_instance(cfg, points[p], t);
                for (std::size_t s = 0; s < n_schemes; ++s)
                    results[(p * n_schemes + s) * n_trials + t] = run_scheme(cfg, inst, cfg.schemes[s], points[p], t);
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = jobs;
            }
        }
    };
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
    if (threads <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

std::vector<SummaryRow> summarize(const ScenarioConfig &cfg, const std::vector<TrialResult> &results)
{
    const auto points = sweep_points(cfg);
    const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
    std::vector<SummaryRow> rows;
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t s = 0; s < cfg.schemes.size(); ++s)
        {
            SummaryRow row;
            row.scheme = cfg.schemes[s];
            row.sweep_value = points[p];
            double sum = 0.0;
            std::vector<double> vals;
            for (std::size_t t = 0; t < n_trials; ++t)
            {
                const auto &r = results[(p * cfg.schemes.size() + s) * n_trials + t];
                row.converged += r.converged ? 1 : 0;
                row.unique += r.unique_argmax ? 1 : 0;
                if (!std::isfinite(r.total_power_w) || (cfg.strict && !r.converged))
                    continue;
                vals.push_back(r.total_power_w);
                sum += r.total_power_w;
            }
            row.included = vals.size();
            if (!vals.empty())
            {
                row.mean = sum / static_cast<double>(vals.size());
                double ss = 0.0;
                for (double v : vals)
                    ss += (v - row.mean) * (v - row.mean);
                if (vals.size() > 1)
                    row.std_error = std::sqrt(ss / static_cast<double>(vals.size() - 1) / static_cast<double>(vals.size()));
            }
            else
                row.mean = row.std_error = std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
        }
    return rows;
}

void write_csv(std::ostream &os, const ScenarioConfig &cfg, const std::vector<TrialResult> &results)
{
    const auto points = sweep_points(cfg);
    const std::size_t n_trials = static_cast<std::size_t>(cfg.trials);
    const auto summary = summarize(cfg, results);
    const std::string param(sweep_name(cfg.sweep));
    auto value = [&](double v) { return cfg.sweep == SweepParam::kNone ? std::string() : format_double(v); };

    os << kCsvHeader << '\n';
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t s = 0; s < cfg.schemes.size(); ++s)
        {
            const std::string prefix = std::string(scheme_name(cfg.schemes[s])) + ',' + param + ',' + value(points[p]) + ',';
            for (std::size_t t = 0; t < n_trials; ++t)
            {
                const auto &r = results[(p * cfg.schemes.size() + s) * n_trials + t];
                os << prefix << r.trial << ',' << r.seed << ',' << format_double(r.total_power_w) << ','
                   << (r.converged ? 1 : 0) << ',' << (r.unique_argmax ? 1 : 0) << ',' << r.iterations << '\n';
            }
            const auto &sr = summary[p * cfg.schemes.size() + s];
            const std::string counts =
                std::to_string(sr.converged) + ',' + std::to_string(sr.unique) + ',' + std::to_string(sr.included);
            os << prefix << "mean,," << format_double(sr.mean) << ',' << counts << '\n';
            os << prefix << "stderr,," << format_double(sr.std_error) << ',' << counts << '\n';
        }
}

void run_experiment(const ScenarioConfig &cfg, const std::filesystem::path &out, unsigned threads)
{
    const auto results = run_all(cfg, threads);
    std::ostringstream os;
    write_csv(os, cfg, results);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot write " + out.string());
    f << os.str();
    f.flush();
    if (!f)
        throw std::runtime_error("write failed for " + out.string());
}

CsvAudit audit_csv(std::istream &in, const ScenarioConfig *cfg, std::size_t recheck)
{
    CsvAudit audit;
    auto problem = [&](std::size_t line, const std::string &what) {
        if (audit.problems.size() < 50)
            audit.problems.push_back("line " + std::to_string(line) + ": " + what);
    };

    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
    {
        problem(1, "header must be exactly \"" + std::string(kCsvHeader) + "\"");
        return audit;
    }

    struct Group
    {
        std::vector<std::pair<std::size_t, TrialResult>> trials; // (line, row)
        std::vector<std::string> raw_power;
        bool have_mean = false;
        bool have_stderr = false;
        double mean = 0.0;
        double std_error = 0.0;
        std::size_t converged = 0, unique = 0, included = 0;
    };
    std::map<std::tuple<std::string, std::string, std::string>, Group> groups;
    std::vector<std::tuple<std::string, std::string, std::string>> order;
    std::map<std::size_t, std::uint64_t> seeds;

    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto f = split(line);
        if (f.size() != 9)
        {
            problem(lineno, "expected 9 fields");
            continue;
        }
        Scheme scheme;
        try
        {
            scheme = parse_scheme(f[0]);
            parse_sweep(f[1]);
        }
        catch (const std::invalid_argument &e)
        {
            problem(lineno, e.what());
            continue;
        }
        double sweep_value = 0.0;
        if (f[1] == "none" ? !f[2].empty() : !parse_real(f[2], sweep_value))
        {
            problem(lineno, "bad sweep value");
            continue;
        }
        const auto key = std::make_tuple(f[0], f[1], f[2]);
        if (!groups.count(key))
            order.push_back(key);
        Group &g = groups[key];

        double power = 0.0;
        if (!parse_real(f[5], power))
        {
            problem(lineno, "bad total_power_w");
            continue;
        }
        std::uint64_t c = 0, u = 0, it = 0;
        if (!parse_u64(f[6], c) || !parse_u64(f[7], u) || !parse_u64(f[8], it))
        {
            problem(lineno, "bad flag or count field");
            continue;
        }

        if (f[3] == "mean" || f[3] == "stderr")
        {
            ++audit.summary_rows;
            if (!f[4].empty())
                problem(lineno, "summary rows carry no seed");
            if (f[3] == "mean")
            {
                g.have_mean = true;
                g.mean = power;
            }
            else
            {
                if (!g.have_mean)
                    problem(lineno, "stderr row before mean row");
                g.have_stderr = true;
                g.std_error = power;
            }
            g.converged = c;
            g.unique = u;
            g.included = it;
            continue;
        }

        ++audit.trial_rows;
        if (g.have_mean)
            problem(lineno, "trial row after the summary of its group");
        std::uint64_t trial = 0, seed = 0;
        if (!parse_u64(f[3], trial) || !parse_u64(f[4], seed))
        {
            problem(lineno, "bad trial or seed");
            continue;
        }
        if (c > 1 || u > 1)
            problem(lineno, "flags must be 0 or 1");
        if (std::isfinite(power) ? power < 0.0 : c != 0)
            problem(lineno, "negative power, or a non-finite power flagged as converged");
        if (trial != g.trials.size())
            problem(lineno, "trial indices must run 0, 1, 2, ... within a group");
        auto [it_seed, fresh] = seeds.emplace(trial, seed);
        if (!fresh && it_seed->second != seed)
            problem(lineno, "trial " + std::to_string(trial) + " uses different seeds across groups");
        if (cfg && seed != derive_trial_seed(cfg->base_seed, trial))
            problem(lineno, "seed does not match the config's base seed");

        TrialResult r;
        r.scheme = scheme;
        r.sweep_value = sweep_value;
        r.trial = trial;
        r.seed = seed;
        r.total_power_w = power;
        r.converged = c == 1;
        r.unique_argmax = u == 1;
        r.iterations = static_cast<int>(it);
        g.trials.emplace_back(lineno, r);
        g.raw_power.push_back(f[5]);
    }

    for (const auto &key : order)
    {
        const Group &g = groups[key];
        const std::string name = std::get<0>(key) + " at " + std::get<1>(key) + "=" + std::get<2>(key);
        if (!g.have_mean || !g.have_stderr)
        {
            problem(lineno, name + ": missing summary rows");
            continue;
        }
        std::size_t conv = 0, uniq = 0;
        for (const auto &[ln, r] : g.trials)
        {
            conv += r.converged;
            uniq += r.unique_argmax;
        }
        if (conv != g.converged || uniq != g.unique)
            problem(lineno, name + ": summary flag counts disagree with the trial rows");

        // the summary may follow either inclusion rule; accept the one whose count matches
        bool matched = false;
        for (bool strict : {false, true})
        {
            if (cfg && strict != cfg->strict)
                continue;
            double sum = 0.0;
            std::vector<double> vals;
            for (const auto &[ln, r] : g.trials)
                if (std::isfinite(r.total_power_w) && (!strict || r.converged))
                {
                    vals.push_back(r.total_power_w);
                    sum += r.total_power_w;
                }
            if (vals.size() != g.included)
                continue;
            if (vals.empty())
            {
                matched = std::isnan(g.mean);
                break;
            }
            const double mean = sum / static_cast<double>(vals.size());
            double ss = 0.0;
            for (double v : vals)
                ss += (v - mean) * (v - mean);
            const double se =
                vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1) / static_cast<double>(vals.size())) : 0.0;
            if (std::abs(mean - g.mean) <= 1e-12 * std::abs(mean) && std::abs(se - g.std_error) <= 1e-9 * std::abs(mean))
            {
                matched = true;
                break;
            }
        }
        if (!matched)
            problem(lineno, name + ": mean/stderr rows do not match the trial rows");
    }

    if (cfg)
    {
        const std::string param(sweep_name(cfg->sweep));
        std::size_t expected_groups = 0;
        for (double v : sweep_points(*cfg))
            for (auto s : cfg->schemes)
            {
                ++expected_groups;
                const auto key = std::make_tuple(std::string(scheme_name(s)), param,
                                                 cfg->sweep == SweepParam::kNone ? std::string() : format_double(v));
                const auto it = groups.find(key);
                if (it == groups.end())
                {
                    problem(lineno, "missing rows for " + std::get<0>(key) + " at " + param + "=" + std::get<2>(key));
                    continue;
                }
                if (it->second.trials.size() != static_cast<std::size_t>(cfg->trials))
                    problem(lineno, std::get<0>(key) + " at " + param + "=" + std::get<2>(key) +
                                        ": wrong number of trials");
                const std::size_t n = std::min(recheck, it->second.trials.size());
                for (std::size_t t = 0; t < n; ++t)
                {
                    const auto &[ln, row] = it->second.trials[t];
                    const TrialResult fresh = run_trial(*cfg, s, v, t);
                    ++audit.rechecked;
                    if (format_double(fresh.total_power_w) != it->second.raw_power[t] ||
                        fresh.converged != row.converged || fresh.unique_argmax != row.unique_argmax ||
                        fresh.iterations != row.iterations)
                        problem(ln, "recomputed trial differs from the recorded row");
                }
            }
        if (groups.size() != expected_groups)
            problem(lineno, "file holds groups the config does not produce");
    }
    return audit;
}

OracleCase random_oracle_case(std::uint64_t seed, std::size_t max_sc, std::size_t max_messages)
{
    SplitMix64 gen(splitmix64_mix(seed ^ 0x6f7261636c652d31ULL));
    OracleCase c;
    c.n_sc = 2 + gen.below(max_sc - 1);
    const std::size_t j_max = std::min(max_messages, c.n_sc);
    const std::size_t j = 1 + gen.below(j_max);
    c.quotes.resize(j * c.n_sc);
    // Rayleigh-like quotes spread over a few decades; the odd unusable pair exercises the matching
    for (auto &q : c.quotes)
        q = gen.below(12) == 0 ? std::numeric_limits<double>::infinity() : 4e-9 / -std::log(gen.uniform_open0());
    for (std::size_t i = 0; i < j; ++i)
        c.demands.push_back(c.bandwidth_hz * (0.25 + 4.0 * gen.uniform_open0()));
    return c;
}

OracleOutcome check_oracle_case(const OracleCase &c)
{
    OracleOutcome out;
    bool solver_ok = true, oracle_ok = true;
    QuotedAllocation got, ref;
    try
    {
        got = solve_quoted_allocation(c.demands, c.quotes, c.n_sc, c.bandwidth_hz);
    }
    catch (const InfeasibleInstance &)
    {
        solver_ok = false;
    }
    try
    {
        ref = brute_force_allocation(c.demands, c.quotes, c.n_sc, c.bandwidth_hz);
    }
    catch (const InfeasibleInstance &)
    {
        oracle_ok = false;
    }
    out.agree = solver_ok == oracle_ok;
    out.feasible = solver_ok && oracle_ok;
    if (!out.feasible)
    {
        out.audit_ok = !solver_ok;
        return out;
    }
    out.solver_power = got.sum_power;
    out.oracle_power = ref.sum_power;
    out.rel_gap = (got.sum_power - ref.sum_power) / ref.sum_power;
    out.audit_ok = audit_quoted(got, c.demands, c.quotes, c.bandwidth_hz).ok();
    return out;
}

} // namespace tilecast
