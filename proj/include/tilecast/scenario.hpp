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

#ifndef TILECAST_SCENARIO_HPP
#define TILECAST_SCENARIO_HPP

#include "tilecast/beamforming.hpp"
#include "tilecast/dc_solver.hpp"
#include "tilecast/geometry.hpp"
#include "tilecast/partition.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tilecast {

enum class Scheme
{
    kProposedAsymptotic,
    kProposedDc,
    kBaseline1, // unicast MRT
    kBaseline2, // multicast MRT
};

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name); // throws std::invalid_argument

enum class SweepParam
{
    kNone,
    kK,
    kM,
    kDelta,
};

std::string_view sweep_name(SweepParam p);
SweepParam parse_sweep(std::string_view name); // throws std::invalid_argument

struct UserSpec
{
    ViewDirection dir;
    int quality = 1; // r_k, 1-based ladder level
};

/// Everything one experiment needs. Sweeps vary one field: K takes the first K users (or, with a
/// direction pool, K directions drawn per trial), M replaces m, delta replaces delta_deg.
struct ScenarioConfig
{
    TilingConfig tiling;
    QualityLadder ladder;
    std::vector<UserSpec> users;
    std::vector<ViewDirection> direction_pool;
    std::size_t m = 4;
    std::size_t n_sc = 16;
    double bandwidth_hz = 39e3;
    double noise_w = 1e-9;
    std::vector<double> beta; // per user; empty means 1 for everyone
    double delta_deg = 0.0;
    int trials = 50;
    std::uint64_t base_seed = 1;
    std::vector<Scheme> schemes;
    SweepParam sweep = SweepParam::kNone;
    std::vector<double> sweep_values;
    BeamRule baseline2_beam = BeamRule::kMrtPrincipal;
    DcStart dc_start = DcStart::kBest;
    bool strict = false; // leave non-converged trials out of the summary rows

    void validate() const;
};

/// Geometric ladder D_l = d1 * ratio^(l-1), l = 1..levels.
QualityLadder geometric_ladder(double d1, double ratio, int levels);

/// Built-in desk-scale scenario for a sweep (kNone gives the K = 5 point of the K sweep).
ScenarioConfig default_config(SweepParam sweep);
std::vector<double> default_sweep_values(SweepParam sweep);

/// Reads a JSON config. Every key is optional; unknown keys and wrong types are errors.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path &path);
std::string config_to_json(const ScenarioConfig &cfg);

/// Yaw shifts +delta, +delta, 0, -delta, -delta, wrapped into [0, 360); pitch unchanged.
std::vector<ViewDirection> shift_directions(std::span<const ViewDirection> base, double delta_deg);

/// Users, qualities and antenna count of one (sweep point, trial).
struct TrialScenario
{
    std::vector<ViewDirection> dirs;
    std::vector<int> qualities;
    std::vector<double> beta;
    std::size_t m = 0;
};

TrialScenario scenario_for(const ScenarioConfig &cfg, double sweep_value, std::uint64_t trial_seed);

} // namespace tilecast

#endif
