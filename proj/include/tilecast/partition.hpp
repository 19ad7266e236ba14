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

#ifndef TILECAST_PARTITION_HPP
#define TILECAST_PARTITION_HPP

#include "tilecast/geometry.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tilecast {

/// A set of users, stored as a bitmask over 0-based user indices (at most 64 users).
/// Ordering is by bitmask value, which fixes the canonical order of subsets and messages.
class UserSet
{
  public:
    static constexpr std::size_t kMaxUsers = 64;

    UserSet() = default;
    explicit UserSet(std::uint64_t bits) : bits_(bits) {}
    static UserSet single(std::size_t user);
    static UserSet of(std::initializer_list<std::size_t> users);

    void insert(std::size_t user);
    bool contains(std::size_t user) const { return user < kMaxUsers && ((bits_ >> user) & 1u) != 0; }
    bool empty() const { return bits_ == 0; }
    std::size_t size() const;
    std::uint64_t bits() const { return bits_; }
    std::vector<std::size_t> members() const;

    // "{1,2}" with 1-based user numbers, for logs and error messages.
    std::string to_string() const;

    auto operator<=>(const UserSet &) const = default;

  private:
    std::uint64_t bits_ = 0;
};

/// Exact-audience partition of the union of requested tiles: groups[S] holds the tiles wanted by
/// every user in S and by nobody outside S.
struct TilePartition
{
    std::map<UserSet, TileSet> groups;
    std::vector<UserSet> index_set; // subsets with a nonempty group, in canonical order
    std::size_t num_users = 0;

    bool empty() const { return groups.empty(); }
};

/// Per-tile encoding rates D_1 < ... < D_L in bits/s. Levels are 1-based.
struct QualityLadder
{
    std::vector<double> rates;

    void validate() const;
    int levels() const { return static_cast<int>(rates.size()); }
    double rate(int level) const;
};

/// Message (S, l): the level-l representations of the tiles in P_S, sent once to the audience.
struct Message
{
    UserSet subset;
    int level = 1;
    UserSet audience;
    std::size_t tile_count = 0;
    double demand_bits_per_s = 0.0;
};

TilePartition build_partition(const std::vector<TileSet> &tile_sets);

/// One message per (S in the index set, l in the quality levels present in S), in subset-then-level order.
/// `qualities` holds r_k for each user (1-based levels); throws std::invalid_argument on levels outside the ladder.
std::vector<Message> build_messages(const TilePartition &part, const std::vector<int> &qualities,
                                    const QualityLadder &ladder);

/// Baseline front-end: one message ({k}, r_k) carrying all of G_k; users with no tiles get no message.
std::vector<Message> unicast_messages(const std::vector<TileSet> &tile_sets, const std::vector<int> &qualities,
                                      const QualityLadder &ladder);

double total_demand(const std::vector<Message> &messages);

} // namespace tilecast

#endif
