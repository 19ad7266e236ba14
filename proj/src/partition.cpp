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

#include "tilecast/partition.hpp"

#include <bit>
#include <stdexcept>

namespace tilecast {

UserSet UserSet::single(std::size_t user)
{
    UserSet s;
    s.insert(user);
    return s;
}

UserSet UserSet::of(std::initializer_list<std::size_t> users)
{
    UserSet s;
    for (auto u : users)
        s.insert(u);
    return s;
}

void UserSet::insert(std::size_t user)
{
    if (user >= kMaxUsers)
        throw std::out_of_range("user index " + std::to_string(user) + " exceeds the 64-user limit");
    bits_ |= std::uint64_t{1} << user;
}

std::size_t UserSet::size() const
{
    return static_cast<std::size_t>(std::popcount(bits_));
}

std::vector<std::size_t> UserSet::members() const
{
    std::vector<std::size_t> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1)
        out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
    return out;
}

std::string UserSet::to_string() const
{
    std::string s = "{";
    bool first = true;
    for (auto k : members())
    {
        if (!first)
            s += ',';
        s += std::to_string(k + 1);
        first = false;
    }
    return s + "}";
}

void QualityLadder::validate() const
{
    if (rates.empty())
        throw std::invalid_argument("quality ladder is empty");
    for (std::size_t i = 0; i < rates.size(); ++i)
    {
        if (!(rates[i] > 0.0))
            throw std::invalid_argument("encoding rates must be positive");
        if (i > 0 && !(rates[i] > rates[i - 1]))
            throw std::invalid_argument("encoding rates must be strictly increasing");
    }
}

double QualityLadder::rate(int level) const
{
    if (level < 1 || level > levels())
        throw std::invalid_argument("quality level " + std::to_string(level) + " outside ladder 1.." +
                                    std::to_string(levels()));
    return rates[static_cast<std::size_t>(level - 1)];
}

TilePartition build_partition(const std::vector<TileSet> &tile_sets)
{
    if (tile_sets.size() > UserSet::kMaxUsers)
        throw std::invalid_argument("at most 64 users are supported");

    std::map<TileId, UserSet> wanted_by;
    for (std::size_t k = 0; k < tile_sets.size(); ++k)
        for (const auto &tile : tile_sets[k])
            wanted_by[tile].insert(k);

    TilePartition part;
    part.num_users = tile_sets.size();
    for (const auto &[tile, users] : wanted_by)
        part.groups[users].insert(tile);
    for (const auto &[subset, tiles] : part.groups)
        part.index_set.push_back(subset);
    return part;
}

namespace {

void check_qualities(std::size_t users, const std::vector<int> &qualities, const QualityLadder &ladder)
{
    ladder.validate();
    if (qualities.size() != users)
        throw std::invalid_argument("need one quality level per user");
    for (int r : qualities)
        (void)ladder.rate(r);
}

} // namespace

std::vector<Message> build_messages(const TilePartition &part, const std::vector<int> &qualities,
                                    const QualityLadder &ladder)
{
    check_qualities(part.num_users, qualities, ladder);

    std::vector<Message> out;
    for (const auto &subset : part.index_set)
    {
        const std::size_t tiles = part.groups.at(subset).size();
        std::map<int, UserSet> by_level;
        for (auto k : subset.members())
            by_level[qualities[k]].insert(k);
        for (const auto &[level, audience] : by_level)
            out.push_back({subset, level, audience, tiles, static_cast<double>(tiles) * ladder.rate(level)});
    }
    return out;
}

std::vector<Message> unicast_messages(const std::vector<TileSet> &tile_sets, const std::vector<int> &qualities,
                                      const QualityLadder &ladder)
{
    check_qualities(tile_sets.size(), qualities, ladder);

    std::vector<Message> out;
    for (std::size_t k = 0; k < tile_sets.size(); ++k)
    {
        if (tile_sets[k].empty())
            continue;
        const auto user = UserSet::single(k);
        const std::size_t tiles = tile_sets[k].size();
        out.push_back({user, qualities[k], user, tiles, static_cast<double>(tiles) * ladder.rate(qualities[k])});
    }
    return out;
}

double total_demand(const std::vector<Message> &messages)
{
    double sum = 0.0;
    for (const auto &msg : messages)
        sum += msg.demand_bits_per_s;
    return sum;
}

} // namespace tilecast
