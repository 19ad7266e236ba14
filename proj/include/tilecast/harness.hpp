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

#ifndef TILECAST_HARNESS_HPP
#define TILECAST_HARNESS_HPP

#include "tilecast/channel.hpp"
#include "tilecast/ofdma_alloc.hpp"
#include "tilecast/partition.hpp"
#include "tilecast/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tilecast {

inline constexpr std::string_view kCsvHeader =
    "scheme,sweep_param,sweep_value,trial,seed,total_power_w,converged,unique_argmax,iterations";

/// One (sweep point, trial): users, tile sets, both message lists and the shared channel draw.
struct TrialInstance
{
    TrialScenario scenario;
    std::uint64_t seed = 0;
    std::vector<TileSet> tile_sets;
    std::vector<Message> messages; // multicast messages (S, l)
    std::vector<Message> unicast;  // one message per user
    ChannelState channel;
};

TrialInstance build_instance(const ScenarioConfig &cfg, double sweep_value, std::size_t trial);

struct TrialResult
{
    Scheme scheme = Scheme::kProposedAsymptotic;
    double sweep_value = 0.0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double total_power_w = 0.0; // +inf: no feasible plan exists; NaN: the plan failed the constraint audit
    bool converged = false;
    bool unique_argmax = false;
    int iterations = 0;
};

/// Solves one scheme on an instance and audits the plan before its power is recorded.
TrialResult run_scheme(const ScenarioConfig &cfg, const TrialInstance &inst, Scheme scheme, double sweep_value,
                       std::size_t trial);
TrialResult run_trial(const ScenarioConfig &cfg, Scheme scheme, double sweep_value, std::size_t trial);

/// The sweep points an experiment visits (a single 0 when the config has no sweep).
std::vector<double> sweep_points(const ScenarioConfig &cfg);

/// Every (sweep point, scheme, trial), in CSV order. Trials run on `threads` workers (0: one per core).
std::vector<TrialResult> run_all(const ScenarioConfig &cfg, unsigned threads = 0);

struct SummaryRow
{
    Scheme scheme = Scheme::kProposedAsymptotic;
    double sweep_value = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t included = 0; // trials in the mean
    std::size_t converged = 0;
    std::size_t unique = 0;
};

/// Mean and standard error per (sweep point, scheme) over the trials with a finite power
/// (and, in strict mode, only the converged ones).
std::vector<SummaryRow> summarize(const ScenarioConfig &cfg, const std::vector<TrialResult> &results);

void write_csv(std::ostream &os, const ScenarioConfig &cfg, const std::vector<TrialResult> &results);
void run_experiment(const ScenarioConfig &cfg, const std::filesystem::path &out, unsigned threads = 0);

std::string format_double(double x);

struct CsvAudit
{
    std::vector<std::string> problems;
    std::size_t trial_rows = 0;
    std::size_t summary_rows = 0;
    std::size_t rechecked = 0;

    bool ok() const { return problems.empty(); }
};

/// Re-verifies a results file: exact header, field syntax, flags, summary rows against the trial rows
/// and, when `cfg` is given, the row set it implies. With `recheck` > 0 the first `recheck` trial rows
/// of every (sweep point, scheme) are recomputed and must match exactly.
CsvAudit audit_csv(std::istream &in, const ScenarioConfig *cfg = nullptr, std::size_t recheck = 0);

// Small random allocation instances for cross-checking the dual solver against exhaustive search.
struct OracleCase
{
    std::vector<double> demands;
    std::vector<double> quotes; // j * n_sc + n, +inf marks an unusable pair
    std::size_t n_sc = 0;
    double bandwidth_hz = 39e3;
};

OracleCase random_oracle_case(std::uint64_t seed, std::size_t max_sc = 4, std::size_t max_messages = 3);

struct OracleOutcome
{
    double solver_power = 0.0;
    double oracle_power = 0.0;
    double rel_gap = 0.0;   // (solver - oracle) / oracle
    bool feasible = true;   // false when both sides report an infeasible instance
    bool agree = true;      // feasibility verdicts match
    bool audit_ok = true;   // solver output passes the 1e-6 audit
};

OracleOutcome check_oracle_case(const OracleCase &c);

} // namespace tilecast

#endif
