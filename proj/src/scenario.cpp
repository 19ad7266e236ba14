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

#include "tilecast/scenario.hpp"

#include "tilecast/channel.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tilecast {

using json = nlohmann::json;

namespace {

constexpr std::uint64_t kPoolStream = 0x706f6f6c2d6b2d31ULL; // separates the pool draw from the channel

struct SchemeEntry
{
    Scheme scheme;
    std::string_view name;
};

constexpr SchemeEntry kSchemes[] = {
    {Scheme::kProposedAsymptotic, "proposed-asymptotic"},
    {Scheme::kProposedDc, "proposed-dc"},
    {Scheme::kBaseline1, "baseline-1"},
    {Scheme::kBaseline2, "baseline-2"},
};

void check_keys(const json &obj, const std::string &where, std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object())
        throw std::invalid_argument(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
    {
        bool known = false;
        for (auto a : allowed)
            known = known || it.key() == a;
        if (!known)
            throw std::invalid_argument(where + ": unknown key \"" + it.key() + "\"");
    }
}

template <typename T> T get(const json &obj, std::string_view key, const std::string &where)
{
    try
    {
        return obj.at(std::string(key)).get<T>();
    }
    catch (const json::exception &e)
    {
        throw std::invalid_argument(where + "." + std::string(key) + ": " + e.what());
    }
}

double get_number(const json &obj, std::string_view key, const std::string &where)
{
    const auto &v = obj.at(std::string(key));
    if (!v.is_number())
        throw std::invalid_argument(where + "." + std::string(key) + ": expected a number");
    return v.get<double>();
}

std::size_t get_count(const json &obj, std::string_view key, const std::string &where)
{
    const auto &v = obj.at(std::string(key));
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw std::invalid_argument(where + "." + std::string(key) + ": expected a nonnegative integer");
    return v.get<std::size_t>();
}

ViewDirection parse_direction(const json &j, const std::string &where, bool with_quality, int *quality)
{
    if (with_quality)
        check_keys(j, where, {"yaw_deg", "pitch_deg", "quality"});
    else
        check_keys(j, where, {"yaw_deg", "pitch_deg"});
    ViewDirection d;
    if (j.contains("yaw_deg"))
        d.yaw_deg = get_number(j, "yaw_deg", where);
    if (j.contains("pitch_deg"))
        d.pitch_deg = get_number(j, "pitch_deg", where);
    if (with_quality && j.contains("quality"))
    {
        if (!j["quality"].is_number_integer())
            throw std::invalid_argument(where + ".quality: expected an integer");
        *quality = j["quality"].get<int>();
    }
    return d;
}

std::vector<double> number_list(const json &j, const std::string &where)
{
    if (!j.is_array())
        throw std::invalid_argument(where + ": expected an array");
    std::vector<double> out;
    for (const auto &x : j)
    {
        if (!x.is_number())
            throw std::invalid_argument(where + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

bool is_whole(double x) { return std::floor(x) == x; }

} // namespace

std::string_view scheme_name(Scheme s)
{
    for (const auto &e : kSchemes)
        if (e.scheme == s)
            return e.name;
    throw std::invalid_argument("unknown scheme");
}

Scheme parse_scheme(std::string_view name)
{
    for (const auto &e : kSchemes)
        if (e.name == name)
            return e.scheme;
    throw std::invalid_argument("unknown scheme \"" + std::string(name) +
                                "\" (expected proposed-asymptotic, proposed-dc, baseline-1 or baseline-2)");
}

std::string_view sweep_name(SweepParam p)
{
    switch (p)
    {
    case SweepParam::kNone:
        return "none";
    case SweepParam::kK:
        return "k";
    case SweepParam::kM:
        return "m";
    case SweepParam::kDelta:
        return "delta";
    }
    throw std::invalid_argument("unknown sweep");
}

SweepParam parse_sweep(std::string_view name)
{
    for (auto p : {SweepParam::kNone, SweepParam::kK, SweepParam::kM, SweepParam::kDelta})
        if (sweep_name(p) == name)
            return p;
    throw std::invalid_argument("unknown sweep \"" + std::string(name) + "\" (expected k, m, delta or none)");
}

void ScenarioConfig::validate() const
{
    tiling.validate();
    ladder.validate();
    if (users.empty())
        throw std::invalid_argument("at least one user is required");
    if (users.size() > UserSet::kMaxUsers)
        throw std::invalid_argument("at most 64 users are supported");
    for (const auto &u : users)
    {
        u.dir.validate();
        if (u.quality < 1 || u.quality > ladder.levels())
            throw std::invalid_argument("user quality outside the ladder");
    }
    for (const auto &d : direction_pool)
        d.validate();
    if (m < 1 || n_sc < 1)
        throw std::invalid_argument("m and n_sc must be at least 1");
    if (!(bandwidth_hz > 0.0) || !(noise_w > 0.0))
        throw std::invalid_argument("bandwidth and noise must be positive");
    for (double b : beta)
        if (!(b > 0.0) || !std::isfinite(b))
            throw std::invalid_argument("beta must be positive");
    if (!beta.empty() && beta.size() < users.size())
        throw std::invalid_argument("beta needs one entry per user");
    if (!(delta_deg >= 0.0))
        throw std::invalid_argument("delta_deg must be nonnegative");
    if ((delta_deg > 0.0 || sweep == SweepParam::kDelta) && users.size() != 5)
        throw std::invalid_argument("the delta shift needs exactly 5 users");
    if (trials < 1)
        throw std::invalid_argument("trials must be at least 1");
    if (schemes.empty())
        throw std::invalid_argument("at least one scheme is required");
    if (sweep != SweepParam::kNone && sweep_values.empty())
        throw std::invalid_argument("sweep needs at least one value");
    for (double v : sweep_values)
    {
        switch (sweep)
        {
        case SweepParam::kNone:
            break;
        case SweepParam::kK:
            if (!is_whole(v) || v < 1 || v > static_cast<double>(users.size()))
                throw std::invalid_argument("K sweep values must be integers in 1..number of users");
            if (!direction_pool.empty() && v > static_cast<double>(direction_pool.size()))
                throw std::invalid_argument("K sweep value exceeds the direction pool");
            break;
        case SweepParam::kM:
            if (!is_whole(v) || v < 1 || v > 4096)
                throw std::invalid_argument("M sweep values must be integers in 1..4096");
            break;
        case SweepParam::kDelta:
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("delta sweep values must be nonnegative");
            break;
        }
    }
}

QualityLadder geometric_ladder(double d1, double ratio, int levels)
{
    QualityLadder l;
    for (int i = 0; i < levels; ++i)
        l.rates.push_back(d1 * std::pow(ratio, i));
    l.validate();
    return l;
}

std::vector<double> default_sweep_values(SweepParam sweep)
{
    switch (sweep)
    {
    case SweepParam::kNone:
        return {};
    case SweepParam::kK:
        return {1, 2, 3, 4, 5};
    case SweepParam::kM:
        return {2, 4, 8, 16, 32};
    case SweepParam::kDelta:
        return {0, 12, 24, 36, 48, 60}; // multiples of the 12-degree column width
    }
    return {};
}

ScenarioConfig default_config(SweepParam sweep)
{
    ScenarioConfig cfg;
    cfg.ladder = geometric_ladder(6000.0, 1.5, 5);
    cfg.schemes = {Scheme::kProposedAsymptotic, Scheme::kProposedDc, Scheme::kBaseline1, Scheme::kBaseline2};
    cfg.sweep = sweep;
    cfg.sweep_values = default_sweep_values(sweep);
    const int r[] = {2, 2, 3, 3, 4};
    switch (sweep)
    {
    case SweepParam::kNone:
    case SweepParam::kK: {
        // three hotspots one tile column apart; every trial draws its users from 30 such viewers.
        // Two quality levels only: with 16 subcarriers, three levels split the shared regions into
        // more messages than there are subcarriers once K = 5.
        const double hot[] = {168.0, 180.0, 192.0};
        const int q[] = {2, 2, 3, 3, 2};
        for (int i = 0; i < 30; ++i)
            cfg.direction_pool.push_back({hot[i % 3], 90.0});
        for (int i = 0; i < 5; ++i)
            cfg.users.push_back({{hot[i % 3], 90.0}, q[i]});
        break;
    }
    case SweepParam::kM: {
        const double yaw[] = {168.0, 180.0, 192.0, 180.0};
        const int q[] = {2, 3, 3, 4};
        for (int i = 0; i < 4; ++i)
            cfg.users.push_back({{yaw[i], 90.0}, q[i]});
        cfg.n_sc = 32;
        break;
    }
    case SweepParam::kDelta: {
        // pairs at 108/120 and 240/252 close in on the viewer at 180 without crossing it
        const double yaw[] = {108.0, 120.0, 180.0, 240.0, 252.0};
        for (int i = 0; i < 5; ++i)
            cfg.users.push_back({{yaw[i], 90.0}, r[i]});
        cfg.n_sc = 32;
        break;
    }
    }
    return cfg;
}

ScenarioConfig parse_config(std::string_view text)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"tiling", "ladder", "users", "direction_pool", "m", "n_sc", "bandwidth_hz", "noise_w", "beta",
                "delta_deg", "trials", "base_seed", "schemes", "sweep", "baseline2_beam", "dc_start", "strict"});

    ScenarioConfig cfg = default_config(SweepParam::kNone);
    cfg.sweep = SweepParam::kNone;
    cfg.sweep_values.clear();

    if (root.contains("tiling"))
    {
        const auto &t = root["tiling"];
        check_keys(t, "tiling", {"u_h", "u_v", "fov_h_deg", "fov_v_deg", "margin_deg"});
        if (t.contains("u_h"))
            cfg.tiling.u_h = static_cast<int>(get_count(t, "u_h", "tiling"));
        if (t.contains("u_v"))
            cfg.tiling.u_v = static_cast<int>(get_count(t, "u_v", "tiling"));
        if (t.contains("fov_h_deg"))
            cfg.tiling.fov_h_deg = get_number(t, "fov_h_deg", "tiling");
        if (t.contains("fov_v_deg"))
            cfg.tiling.fov_v_deg = get_number(t, "fov_v_deg", "tiling");
        if (t.contains("margin_deg"))
            cfg.tiling.margin_deg = get_number(t, "margin_deg", "tiling");
    }
    if (root.contains("ladder"))
        cfg.ladder.rates = number_list(root["ladder"], "ladder");
    if (root.contains("users"))
    {
        if (!root["users"].is_array())
            throw std::invalid_argument("users: expected an array");
        cfg.users.clear();
        for (std::size_t i = 0; i < root["users"].size(); ++i)
        {
            UserSpec u;
            u.dir = parse_direction(root["users"][i], "users[" + std::to_string(i) + "]", true, &u.quality);
            cfg.users.push_back(u);
        }
    }
    if (root.contains("direction_pool"))
    {
        if (!root["direction_pool"].is_array())
            throw std::invalid_argument("direction_pool: expected an array");
        cfg.direction_pool.clear();
        for (std::size_t i = 0; i < root["direction_pool"].size(); ++i)
            cfg.direction_pool.push_back(
                parse_direction(root["direction_pool"][i], "direction_pool[" + std::to_string(i) + "]", false, nullptr));
    }
    if (root.contains("m"))
        cfg.m = get_count(root, "m", "config");
    if (root.contains("n_sc"))
        cfg.n_sc = get_count(root, "n_sc", "config");
    if (root.contains("bandwidth_hz"))
        cfg.bandwidth_hz = get_number(root, "bandwidth_hz", "config");
    if (root.contains("noise_w"))
        cfg.noise_w = get_number(root, "noise_w", "config");
    if (root.contains("beta"))
        cfg.beta = number_list(root["beta"], "beta");
    if (root.contains("delta_deg"))
        cfg.delta_deg = get_number(root, "delta_deg", "config");
    if (root.contains("trials"))
        cfg.trials = static_cast<int>(get_count(root, "trials", "config"));
    if (root.contains("base_seed"))
    {
        if (!root["base_seed"].is_number_unsigned() && !root["base_seed"].is_number_integer())
            throw std::invalid_argument("base_seed: expected an unsigned integer");
        cfg.base_seed = get<std::uint64_t>(root, "base_seed", "config");
    }
    if (root.contains("schemes"))
    {
        if (!root["schemes"].is_array())
            throw std::invalid_argument("schemes: expected an array");
        cfg.schemes.clear();
        for (const auto &s : root["schemes"])
        {
            if (!s.is_string())
                throw std::invalid_argument("schemes: expected names");
            cfg.schemes.push_back(parse_scheme(s.get<std::string>()));
        }
    }
    if (root.contains("sweep"))
    {
        const auto &s = root["sweep"];
        check_keys(s, "sweep", {"param", "values"});
        if (s.contains("param"))
            cfg.sweep = parse_sweep(get<std::string>(s, "param", "sweep"));
        cfg.sweep_values = s.contains("values") ? number_list(s["values"], "sweep.values") : default_sweep_values(cfg.sweep);
    }
    if (root.contains("baseline2_beam"))
    {
        const auto name = get<std::string>(root, "baseline2_beam", "config");
        if (name == "principal")
            cfg.baseline2_beam = BeamRule::kMrtPrincipal;
        else if (name == "weighted-sum")
            cfg.baseline2_beam = BeamRule::kMrtWeightedSum;
        else
            throw std::invalid_argument("baseline2_beam: expected principal or weighted-sum");
    }
    if (root.contains("dc_start"))
    {
        const auto name = get<std::string>(root, "dc_start", "config");
        if (name == "best")
            cfg.dc_start = DcStart::kBest;
        else if (name == "asymptotic")
            cfg.dc_start = DcStart::kAsymptotic;
        else if (name == "random")
            cfg.dc_start = DcStart::kRandom;
        else
            throw std::invalid_argument("dc_start: expected best, asymptotic or random");
    }
    if (root.contains("strict"))
    {
        if (!root["strict"].is_boolean())
            throw std::invalid_argument("strict: expected true or false");
        cfg.strict = root["strict"].get<bool>();
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

std::string config_to_json(const ScenarioConfig &cfg)
{
    json j;
    j["tiling"] = {{"u_h", cfg.tiling.u_h},
                   {"u_v", cfg.tiling.u_v},
                   {"fov_h_deg", cfg.tiling.fov_h_deg},
                   {"fov_v_deg", cfg.tiling.fov_v_deg},
                   {"margin_deg", cfg.tiling.margin_deg}};
    j["ladder"] = cfg.ladder.rates;
    j["users"] = json::array();
    for (const auto &u : cfg.users)
        j["users"].push_back({{"yaw_deg", u.dir.yaw_deg}, {"pitch_deg", u.dir.pitch_deg}, {"quality", u.quality}});
    j["direction_pool"] = json::array();
    for (const auto &d : cfg.direction_pool)
        j["direction_pool"].push_back({{"yaw_deg", d.yaw_deg}, {"pitch_deg", d.pitch_deg}});
    j["m"] = cfg.m;
    j["n_sc"] = cfg.n_sc;
    j["bandwidth_hz"] = cfg.bandwidth_hz;
    j["noise_w"] = cfg.noise_w;
    j["beta"] = cfg.beta;
    j["delta_deg"] = cfg.delta_deg;
    j["trials"] = cfg.trials;
    j["base_seed"] = cfg.base_seed;
    j["schemes"] = json::array();
    for (auto s : cfg.schemes)
        j["schemes"].push_back(std::string(scheme_name(s)));
    j["sweep"] = {{"param", std::string(sweep_name(cfg.sweep))}, {"values", cfg.sweep_values}};
    j["baseline2_beam"] = cfg.baseline2_beam == BeamRule::kMrtWeightedSum ? "weighted-sum" : "principal";
    j["dc_start"] = cfg.dc_start == DcStart::kRandom       ? "random"
                    : cfg.dc_start == DcStart::kAsymptotic ? "asymptotic"
                                                           : "best";
    j["strict"] = cfg.strict;
    return j.dump(2) + "\n";
}

std::vector<ViewDirection> shift_directions(std::span<const ViewDirection> base, double delta_deg)
{
    if (base.size() != 5)
        throw std::invalid_argument("shift_directions needs exactly 5 directions");
    if (!(delta_deg >= 0.0))
        throw std::invalid_argument("delta must be nonnegative");
    const double sign[] = {1.0, 1.0, 0.0, -1.0, -1.0};
    std::vector<ViewDirection> out(base.begin(), base.end());
    for (std::size_t i = 0; i < 5; ++i)
    {
        double yaw = std::fmod(out[i].yaw_deg + sign[i] * delta_deg, 360.0);
        if (yaw < 0.0)
            yaw += 360.0;
        if (yaw >= 360.0)
            yaw -= 360.0;
        out[i].yaw_deg = yaw;
    }
    return out;
}

TrialScenario scenario_for(const ScenarioConfig &cfg, double sweep_value, std::uint64_t trial_seed)
{
    TrialScenario s;
    s.m = cfg.m;
    std::size_t k = cfg.users.size();
    double delta = cfg.delta_deg;
    switch (cfg.sweep)
    {
    case SweepParam::kNone:
        break;
    case SweepParam::kK:
        k = static_cast<std::size_t>(sweep_value);
        break;
    case SweepParam::kM:
        s.m = static_cast<std::size_t>(sweep_value);
        break;
    case SweepParam::kDelta:
        delta = sweep_value;
        break;
    }

    if (!cfg.direction_pool.empty() && cfg.sweep == SweepParam::kK)
    {
        // uniform draw without replacement; a prefix of one permutation, so user sets nest across K
        std::vector<std::size_t> order(cfg.direction_pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        SplitMix64 gen(splitmix64_mix(trial_seed ^ kPoolStream));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[gen.below(i)]);
        for (std::size_t i = 0; i < k; ++i)
            s.dirs.push_back(cfg.direction_pool[order[i]]);
    }
    else
    {
        for (std::size_t i = 0; i < k; ++i)
            s.dirs.push_back(cfg.users[i].dir);
        if (delta > 0.0 || cfg.sweep == SweepParam::kDelta)
            s.dirs = shift_directions(s.dirs, delta);
    }
    for (std::size_t i = 0; i < k; ++i)
    {
        s.qualities.push_back(cfg.users[i].quality);
        s.beta.push_back(cfg.beta.empty() ? 1.0 : cfg.beta[i]);
    }
    return s;
}

} // namespace tilecast
