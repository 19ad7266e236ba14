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

#include "tilecast/audit.hpp"
#include "tilecast/dc_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace tilecast;

namespace {

constexpr double kB = 39e3;
constexpr double kLn2 = std::numbers::ln2;

struct Instance
{
    ChannelState ch;
    std::vector<Message> msgs;
};

Instance three_user(std::uint64_t seed, std::size_t n_sc = 8, std::size_t m = 4)
{
    ChannelSpec spec;
    spec.m = m;
    spec.n_sc = n_sc;
    spec.k_users = 3;
    Instance in{sample_channel(seed, spec), {}};
    const UserSet sets[] = {UserSet::of({0, 1, 2}), UserSet::of({0, 1}), UserSet::of({2}), UserSet::of({1})};
    const double demand[] = {3.0, 1.5, 1.0, 0.7};
    for (int i = 0; i < 4; ++i)
    {
        Message msg;
        msg.subset = msg.audience = sets[i];
        msg.demand_bits_per_s = demand[i] * kB;
        in.msgs.push_back(msg);
    }
    return in;
}

} // namespace

TEST_CASE("g_value")
{
    CHECK(g_value(0.0, 2.5, kB) == 2.5);
    const double s = 1.7e-9, g = kLn2 * s;
    CHECK(g_value(g, s, kB) == doctest::Approx(-g * kB / kLn2 + s).epsilon(1e-12));
    CHECK(g_value(1e-9, 0.0, kB) == -std::numeric_limits<double>::infinity());
    CHECK(g_value(0.0, 0.0, kB) == 0.0);
}

TEST_CASE("mu_rule")
{
    const std::vector<double> a{1.0, 3.0, 2.0};
    CHECK(mu_rule(a).index == 1);
    CHECK(mu_rule(a).unique);
    const std::vector<double> tie{1.0, 3.0, 3.0};
    CHECK(mu_rule(tie).index == 1);
    CHECK_FALSE(mu_rule(tie).unique);
    const double ninf = -std::numeric_limits<double>::infinity();
    const std::vector<double> none{ninf, ninf};
    CHECK_THROWS_AS(mu_rule(none), NoAssignment);

    SplitMix64 gen(3);
    for (int i = 0; i < 200; ++i)
    {
        std::vector<double> v(1 + gen.below(9));
        for (auto &x : v)
            x = gen.uniform_open0() - 0.5;
        std::size_t best = 0;
        for (std::size_t j = 1; j < v.size(); ++j)
            if (v[j] > v[best])
                best = j;
        CHECK(mu_rule(v).index == best);
    }
}

TEST_CASE("c_rule")
{
    const double lam = 2e-9;
    CHECK(c_rule(2 * kLn2 * lam, lam, 1.0, kB) == doctest::Approx(kB).epsilon(1e-12));
    CHECK(c_rule(2 * kLn2 * lam, lam, 0.0, kB) == 0.0);
    CHECK(c_rule(0.9 * kLn2 * lam, lam, 1.0, kB) == 0.0);
    CHECK(c_rule(0.0, lam, 1.0, kB) == 0.0);
}

TEST_CASE("w_rule")
{
    const std::size_t m = 3;
    const double noise = 1e-9;
    const CVec h{1.0, 0.5, -0.25};
    const std::vector<AudienceChannel> aud{{h, 1.0}};
    const std::vector<double> lam{1.0};

    SUBCASE("mu = 0 gives no beam")
    {
        const auto w = w_rule(lam, aud, normalized(h), 0.0, kB, m, noise, kB);
        CHECK(cnorm(w) == 0.0);
    }
    SUBCASE("previous point orthogonal to the channel: zero direction")
    {
        const CVec orth{0.5, -1.0, 0.0};
        const auto w = w_rule(lam, aud, orth, 1.0, 0.0, m, noise, kB);
        CHECK(cnorm(w) == 0.0);
    }
    SUBCASE("single user: direction along h, constraint met with equality")
    {
        // small point: the linearised terms stay comparable to the target
        CVec prev = normalized(h);
        for (auto &x : prev)
            x *= 1e-4;
        const double c = 2.0 * kB;
        const auto w = w_rule(lam, aud, prev, 1.0, c, m, noise, kB);
        CHECK(std::abs(cdot(normalized(h), normalized(w))) == doctest::Approx(1.0).epsilon(1e-12));
        const double lhs = std::exp2(c / kB) - 1.0;
        const double rhs = (2.0 * std::real(cdot(prev, h) * cdot(h, w)) - std::norm(cdot(h, prev))) / (m * noise);
        CHECK(rhs == doctest::Approx(lhs).epsilon(1e-9));
    }
    SUBCASE("multicast: every member satisfied, the tightest with equality")
    {
        SplitMix64 gen(21);
        CVec h1(m), h2(m), prev(m);
        for (std::size_t i = 0; i < m; ++i)
        {
            h1[i] = complex_gaussian(gen);
            h2[i] = complex_gaussian(gen);
        }
        for (std::size_t i = 0; i < m; ++i)
            prev[i] = 1e-4 * (h1[i] + h2[i]);
        const std::vector<AudienceChannel> two{{h1, 1.0}, {h2, 0.5}};
        const std::vector<double> l2{0.7, 1.3};
        const double c = 1.2 * kB;
        const auto w = w_rule(l2, two, prev, 1.0, c, m, noise, kB);
        const double need = std::exp2(c / kB) - 1.0;
        double tightest = std::numeric_limits<double>::infinity();
        for (const auto &a : two)
        {
            const double lin = a.beta *
                               (2.0 * std::real(cdot(prev, a.h) * cdot(a.h, w)) - std::norm(cdot(a.h, prev))) /
                               (m * noise);
            CHECK(lin >= need * (1 - 1e-9));
            tightest = std::min(tightest, lin);
        }
        CHECK(tightest == doctest::Approx(need).epsilon(1e-9));
    }
}

TEST_CASE("subgrad_step projects onto the nonnegative orthant")
{
    DcDuals d{{1.0, 0.0}, {{0.5, 0.0}, {}}};
    DcResiduals zero{{0.0, 0.0}, {{0.0, 0.0}, {}}};
    const auto same = subgrad_step(d, zero, 0.3);
    CHECK(same.gamma == d.gamma);
    CHECK(same.lambda == d.lambda);

    DcResiduals r{{2.0, -5.0}, {{-4.0, -1.0}, {}}};
    const auto s = subgrad_step(d, r, 0.25);
    CHECK(s.gamma[0] == doctest::Approx(1.5));
    CHECK(s.gamma[1] == 0.0);
    CHECK(s.lambda[0][0] == 0.0);
    CHECK(s.lambda[0][1] == 0.0);
}

TEST_CASE("initial point and state round trip")
{
    const auto in = three_user(5);
    const auto p = initial_point(in.ch, in.msgs);
    const auto asym = solve_fixed_beams(in.ch, in.msgs, BeamRule::kAsymptotic);
    const auto b2 = solve_fixed_beams(in.ch, in.msgs, BeamRule::kMrtPrincipal);
    CHECK(p.objective_w == doctest::Approx(std::min(asym.total_power_w, b2.total_power_w)).epsilon(1e-12));

    DcOptions only_asym;
    only_asym.start = DcStart::kAsymptotic;
    CHECK(initial_point(in.ch, in.msgs, only_asym).objective_w == doctest::Approx(asym.total_power_w).epsilon(1e-12));

    const auto st = state_from_allocation(asym, in.ch, in.msgs);
    for (std::size_t n = 0; n < in.ch.n_sc; ++n)
    {
        double sum = 0.0;
        for (std::size_t j = 0; j < in.msgs.size(); ++j)
        {
            sum += st.mu[j * in.ch.n_sc + n];
            if (asym.owner[n] == j)
                CHECK(std::norm(cnorm(st.at(j, n))) == doctest::Approx(asym.eta[n]).epsilon(1e-12));
            else
                CHECK(cnorm(st.at(j, n)) == 0.0);
        }
        CHECK(sum == 1.0);
    }
}

TEST_CASE("convex approximation: no worse than its linearisation point, and a fixed point at convergence")
{
    const auto in = three_user(6);
    const auto p = initial_point(in.ch, in.msgs);
    const auto one = solve_convex_approx(p, in.ch, in.msgs);
    CHECK(one.state.objective_w <= p.objective_w * (1 + 1e-9));
    for (const auto &g : one.duals.gamma)
        CHECK(g >= 0.0);
    for (const auto &l : one.duals.lambda)
        for (double x : l)
            CHECK(x >= 0.0);

    auto cur = one.state;
    for (int t = 0; t < 60; ++t)
        cur = solve_convex_approx(cur, in.ch, in.msgs).state;
    const auto again = solve_convex_approx(cur, in.ch, in.msgs).state;
    CHECK(again.objective_w == doctest::Approx(cur.objective_w).epsilon(1e-4));
}

TEST_CASE("dc_solve: monotone, feasible, binary")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        const auto in = three_user(100 + seed);
        const auto r = dc_solve(in.ch, in.msgs);
        REQUIRE(r.objective_history.size() >= 1);
        for (std::size_t t = 1; t < r.objective_history.size(); ++t)
            CHECK(r.objective_history[t] <= r.objective_history[t - 1] * (1 + 1e-8));
        const auto audit = audit_allocation(r.allocation, in.ch, in.msgs);
        CHECK_MESSAGE(audit.ok(), audit.summary());
        CHECK(r.allocation.total_power_w <= r.objective_history.front() * (1 + 1e-9));
        CHECK(r.allocation.owner.size() == in.ch.n_sc);
    }
}

TEST_CASE("dc_solve: random starts stay feasible and monotone")
{
    const auto in = three_user(42);
    DcOptions opt;
    opt.start = DcStart::kRandom;
    opt.random_seed = 9;
    const auto r = dc_solve(in.ch, in.msgs, opt);
    for (std::size_t t = 1; t < r.objective_history.size(); ++t)
        CHECK(r.objective_history[t] <= r.objective_history[t - 1] * (1 + 1e-8));
    CHECK(audit_allocation(r.allocation, in.ch, in.msgs).ok());
}

TEST_CASE("single user: matches the MRT water-filling solution")
{
    ChannelSpec spec;
    spec.m = 4;
    spec.n_sc = 6;
    spec.k_users = 1;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        const auto ch = sample_channel(seed, spec);
        Message msg;
        msg.subset = msg.audience = UserSet::of({0});
        msg.demand_bits_per_s = 4.0 * kB;
        const std::vector<Message> msgs{msg};
        const auto dc = dc_solve(ch, msgs);
        const auto asym = solve_fixed_beams(ch, msgs, BeamRule::kAsymptotic);
        CHECK(dc.allocation.total_power_w == doctest::Approx(asym.total_power_w).epsilon(2e-2));
        // and with closed-form water-filling over the MRT quotes
        std::vector<double> q;
        for (std::size_t n = 0; n < 6; ++n)
            q.push_back(4 * 1e-9 / std::norm(cnorm(ch.h(n, 0))));
        CHECK(dc.allocation.total_power_w ==
              doctest::Approx(waterfill_cost(q, msg.demand_bits_per_s, kB) / 4).epsilon(1e-3));
    }
}
