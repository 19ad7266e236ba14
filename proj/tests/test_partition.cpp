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

#include <doctest.h>

#include <random>

using namespace tilecast;

namespace {

TileSet tiles(std::initializer_list<std::pair<int, int>> v)
{
    TileSet s;
    for (auto [c, r] : v)
        s.insert({c, r});
    return s;
}

std::vector<TileSet> three_users()
{
    return {
        tiles({{2, 1}, {3, 1}, {4, 1}, {5, 1}, {2, 2}, {3, 2}, {4, 2}, {5, 2}, {2, 3}, {3, 3}, {4, 3}, {5, 3}}),
        tiles({{2, 2}, {3, 2}, {4, 2}, {5, 2}, {2, 3}, {3, 3}, {4, 3}, {5, 3}, {2, 4}, {3, 4}, {4, 4}, {5, 4}}),
        tiles({{4, 2}, {5, 2}, {6, 2}, {7, 2}, {4, 3}, {5, 3}, {6, 3}, {7, 3}, {4, 4}, {5, 4}, {6, 4}, {7, 4}}),
    };
}

QualityLadder ladder()
{
    QualityLadder l;
    l.rates = {100.0, 250.0, 600.0};
    return l;
}

const Message *find(const std::vector<Message> &msgs, UserSet s, int level)
{
    for (const auto &m : msgs)
        if (m.subset == s && m.level == level)
            return &m;
    return nullptr;
}

} // namespace

TEST_CASE("three-user example: all six groups exactly (users numbered from 0)")
{
    const auto part = build_partition(three_users());
    REQUIRE(part.groups.size() == 6);
    CHECK(part.groups.at(UserSet::of({0})) == tiles({{2, 1}, {3, 1}, {4, 1}, {5, 1}}));
    CHECK(part.groups.at(UserSet::of({1})) == tiles({{2, 4}, {3, 4}}));
    CHECK(part.groups.at(UserSet::of({2})) == tiles({{6, 2}, {6, 3}, {6, 4}, {7, 2}, {7, 3}, {7, 4}}));
    CHECK(part.groups.at(UserSet::of({0, 1})) == tiles({{2, 2}, {2, 3}, {3, 2}, {3, 3}}));
    CHECK(part.groups.at(UserSet::of({1, 2})) == tiles({{4, 4}, {5, 4}}));
    CHECK(part.groups.at(UserSet::of({0, 1, 2})) == tiles({{4, 2}, {4, 3}, {5, 2}, {5, 3}}));
    CHECK(part.groups.count(UserSet::of({0, 2})) == 0);
    CHECK(part.index_set.size() == 6);
}

TEST_CASE("three-user example: messages with r = (1, 1, 2)")
{
    const auto part = build_partition(three_users());
    const auto msgs = build_messages(part, {1, 1, 2}, ladder());

    auto audience = [&](UserSet s, int l) {
        const Message *m = find(msgs, s, l);
        REQUIRE(m != nullptr);
        return m->audience;
    };
    CHECK(audience(UserSet::of({0}), 1) == UserSet::of({0}));
    CHECK(audience(UserSet::of({0, 1}), 1) == UserSet::of({0, 1}));
    CHECK(audience(UserSet::of({1}), 1) == UserSet::of({1}));
    CHECK(audience(UserSet::of({2}), 2) == UserSet::of({2}));

    const Message *a = find(msgs, UserSet::of({1, 2}), 1);
    const Message *b = find(msgs, UserSet::of({1, 2}), 2);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->audience == UserSet::of({1}));
    CHECK(b->audience == UserSet::of({2}));
    CHECK(a->demand_bits_per_s == doctest::Approx(2 * 100.0));
    CHECK(b->demand_bits_per_s == doctest::Approx(2 * 250.0));
    CHECK(find(msgs, UserSet::of({1, 2}), 3) == nullptr);
    CHECK(msgs.size() == 8);
}

TEST_CASE("unicast messages")
{
    const auto uni = unicast_messages(three_users(), {1, 1, 2}, ladder());
    REQUIRE(uni.size() == 3);
    CHECK(uni[0].demand_bits_per_s == doctest::Approx(12 * 100.0));
    CHECK(uni[1].demand_bits_per_s == doctest::Approx(12 * 100.0));
    CHECK(uni[2].demand_bits_per_s == doctest::Approx(12 * 250.0));
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(uni[k].audience == UserSet::single(k));

    SUBCASE("one user: unicast equals multicast")
    {
        const std::vector<TileSet> one{three_users()[0]};
        const auto a = unicast_messages(one, {2}, ladder());
        const auto b = build_messages(build_partition(one), {2}, ladder());
        REQUIRE(a.size() == 1);
        REQUIRE(b.size() == 1);
        CHECK(a[0].audience == b[0].audience);
        CHECK(a[0].demand_bits_per_s == b[0].demand_bits_per_s);
    }
    SUBCASE("empty tile set sends nothing")
    {
        const auto u = unicast_messages({three_users()[0], TileSet{}}, {1, 1}, ladder());
        CHECK(u.size() == 1);
    }
}

TEST_CASE("degenerate partitions")
{
    CHECK(build_partition({TileSet{}, TileSet{}}).empty());

    const auto disjoint = build_partition({tiles({{1, 1}}), tiles({{2, 1}, {3, 1}}), tiles({{5, 5}})});
    for (const auto &[s, g] : disjoint.groups)
        CHECK(s.size() == 1);

    const auto same = tiles({{1, 1}, {2, 1}, {3, 2}});
    const auto msgs = build_messages(build_partition({same, same, same}), {2, 2, 2}, ladder());
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].audience == UserSet::of({0, 1, 2}));
    CHECK(msgs[0].demand_bits_per_s == doctest::Approx(3 * 250.0));

    CHECK_THROWS(build_messages(build_partition({same}), {4}, ladder()));
    CHECK_THROWS(build_messages(build_partition({same}), {0}, ladder()));
}

TEST_CASE("random instances: partition and delivery invariants")
{
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 100; ++trial)
    {
        const std::size_t k = 1 + gen() % 6;
        std::vector<TileSet> g(k);
        std::vector<int> r(k);
        for (std::size_t u = 0; u < k; ++u)
        {
            for (int c = 1; c <= 6; ++c)
                for (int row = 1; row <= 3; ++row)
                    if (gen() % 3 == 0)
                        g[u].insert({c, row});
            r[u] = 1 + static_cast<int>(gen() % 3);
        }
        const auto part = build_partition(g);

        // every tile of the union sits in exactly the group of the users that need it
        std::size_t counted = 0;
        for (const auto &[s, group] : part.groups)
        {
            CHECK_FALSE(group.empty());
            counted += group.size();
            for (const auto &t : group)
                for (std::size_t u = 0; u < k; ++u)
                    CHECK(s.contains(u) == (g[u].count(t) == 1));
        }
        TileSet uni;
        for (const auto &s : g)
            uni.insert(s.begin(), s.end());
        CHECK(counted == uni.size());

        // each user receives each of its tiles exactly once, at its own quality
        const auto msgs = build_messages(part, r, ladder());
        for (std::size_t u = 0; u < k; ++u)
        {
            std::size_t got = 0;
            for (const auto &m : msgs)
                if (m.audience.contains(u))
                {
                    CHECK(m.level == r[u]);
                    CHECK(m.subset.contains(u));
                    got += part.groups.at(m.subset).size();
                }
            CHECK(got == g[u].size());
        }
        for (const auto &m : msgs)
            CHECK(m.demand_bits_per_s == doctest::Approx(m.tile_count * ladder().rate(m.level)));
    }
}
