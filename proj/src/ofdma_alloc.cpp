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

#include "tilecast/ofdma_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>

namespace tilecast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;
constexpr std::size_t kPolishStarts = 16;
constexpr double kMaxLogStep = 1.0;

void check_instance(std::span<const double> demands, std::span<const double> quotes, std::size_t n_sc,
                    double bandwidth_hz)
{
    if (demands.empty())
        throw std::invalid_argument("no messages to allocate");
    if (n_sc == 0)
        throw std::invalid_argument("no subcarriers");
    if (quotes.size() != demands.size() * n_sc)
        throw std::invalid_argument("quote table must hold one entry per (message, subcarrier)");
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    for (double d : demands)
        if (!(d > 0.0) || !std::isfinite(d))
            throw std::invalid_argument("message demands must be positive and finite");
    for (double q : quotes)
        if (!(q > 0.0))
            throw std::invalid_argument("power quotes must be positive");
    for (std::size_t j = 0; j < demands.size(); ++j)
    {
        bool usable = false;
        for (std::size_t n = 0; n < n_sc; ++n)
            usable = usable || std::isfinite(quotes[j * n_sc + n]);
        if (!usable)
            throw InfeasibleInstance("message " + std::to_string(j) + " has no finite power quote");
    }
}

// Water level (in quote units) and total power for a demand of `spec_eff` bits/s/Hz over sorted quotes.
struct Level
{
    double nu = kInf;
    double power = kInf;
};

Level waterfill_sorted(std::span<const double> q, double spec_eff)
{
    double log_sum = 0.0;
    for (std::size_t a = 1; a <= q.size(); ++a)
    {
        if (!std::isfinite(q[a - 1]))
            break;
        log_sum += std::log2(q[a - 1]);
        const double nu = std::exp2((spec_eff + log_sum) / static_cast<double>(a));
        if (a == q.size() || !std::isfinite(q[a]) || nu <= q[a])
        {
            double power = 0.0;
            for (std::size_t i = 0; i < a; ++i)
                power += nu - q[i];
            return {nu, power};
        }
    }
    return {};
}

// Per-message subcarrier lists with cached water-filling costs (normalised units).
class AssignmentCost
{
  public:
    AssignmentCost(std::span<const double> quotes, std::span<const double> spec_eff, std::size_t n_sc)
        : quotes_(quotes), spec_eff_(spec_eff), n_sc_(n_sc)
    {
    }

    double cost(std::size_t j, std::span<const std::size_t> subcarriers) const
    {
        scratch_.clear();
        for (auto n : subcarriers)
            scratch_.push_back(quotes_[j * n_sc_ + n]);
        std::sort(scratch_.begin(), scratch_.end());
        return waterfill_sorted(scratch_, spec_eff_[j]).power;
    }

    double level(std::size_t j, std::span<const std::size_t> subcarriers) const
    {
        scratch_.clear();
        for (auto n : subcarriers)
            scratch_.push_back(quotes_[j * n_sc_ + n]);
        std::sort(scratch_.begin(), scratch_.end());
        return waterfill_sorted(scratch_, spec_eff_[j]).nu;
    }

    double total(std::span<const std::size_t> owner) const
    {
        const auto sets = groups(owner);
        double sum = 0.0;
        for (std::size_t j = 0; j < sets.size(); ++j)
            sum += cost(j, sets[j]);
        return sum;
    }

    std::vector<std::vector<std::size_t>> groups(std::span<const std::size_t> owner) const
    {
        std::vector<std::vector<std::size_t>> sets(spec_eff_.size());
        for (std::size_t n = 0; n < owner.size(); ++n)
            sets[owner[n]].push_back(n);
        return sets;
    }

    bool usable(std::size_t j, std::size_t n) const { return std::isfinite(quotes_[j * n_sc_ + n]); }

  private:
    std::span<const double> quotes_;
    std::span<const double> spec_eff_;
    std::size_t n_sc_;
    mutable std::vector<double> scratch_;
};

// Kuhn's augmenting-path matching of messages to distinct usable subcarriers.
bool augment(std::size_t j, const AssignmentCost &ac, std::size_t n_sc, std::vector<char> &seen,
             std::vector<std::size_t> &match_of_sc)
{
    for (std::size_t n = 0; n < n_sc; ++n)
    {
        if (!ac.usable(j, n) || seen[n])
            continue;
        seen[n] = 1;
        if (match_of_sc[n] == SIZE_MAX || augment(match_of_sc[n], ac, n_sc, seen, match_of_sc))
        {
            match_of_sc[n] = j;
            return true;
        }
    }
    return false;
}

std::vector<std::size_t> skeleton_matching(const AssignmentCost &ac, std::size_t num_messages, std::size_t n_sc)
{
    std::vector<std::size_t> match_of_sc(n_sc, SIZE_MAX);
    for (std::size_t j = 0; j < num_messages; ++j)
    {
        std::vector<char> seen(n_sc, 0);
        if (!augment(j, ac, n_sc, seen, match_of_sc))
            throw InfeasibleInstance("cannot give every message its own usable subcarrier (" +
                                     std::to_string(num_messages) + " messages, " + std::to_string(n_sc) +
                                     " subcarriers)");
    }
    return match_of_sc;
}

// Min-cost assignment of each message to its own subcarrier (Hungarian method with potentials,
// rows = messages <= columns = subcarriers). Costs must be finite.
std::vector<std::size_t> min_cost_matching(const std::vector<double> &cost, std::size_t rows, std::size_t cols)
{
    std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
    std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
    for (std::size_t i = 1; i <= rows; ++i)
    {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(cols + 1, kInf);
        std::vector<char> used(cols + 1, 0);
        do
        {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= cols; ++j)
                if (!used[j])
                {
                    const double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
                    if (cur < minv[j])
                    {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if (minv[j] < delta)
                    {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            for (std::size_t j = 0; j <= cols; ++j)
                if (used[j])
                {
                    u[p[j]] += delta;
                    v[j] -= delta;
                }
                else
                    minv[j] -= delta;
            j0 = j1;
        } while (p[j0] != 0);
        do
        {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> match_of_sc(cols, SIZE_MAX);
    for (std::size_t j = 1; j <= cols; ++j)
        if (p[j] != 0)
            match_of_sc[j - 1] = p[j] - 1;
    return match_of_sc;
}

std::size_t greedy_owner_of(std::span<const double> qn, std::size_t n, std::size_t n_sc, std::size_t num_messages)
{
    std::size_t best = 0;
    for (std::size_t j = 1; j < num_messages; ++j)
        if (qn[j * n_sc + n] < qn[best * n_sc + n])
            best = j;
    return best;
}

// Makes an assignment feasible: unusable pairs are moved, and messages left without a usable subcarrier
// take the one that hurts least, falling back to the matching skeleton.
std::vector<std::size_t> repair(std::vector<std::size_t> owner, const AssignmentCost &ac, std::size_t num_messages,
                                std::span<const std::size_t> skeleton)
{
    const std::size_t n_sc = owner.size();
    for (std::size_t n = 0; n < n_sc; ++n)
        if (!ac.usable(owner[n], n))
            for (std::size_t j = 0; j < num_messages; ++j)
                if (ac.usable(j, n))
                {
                    owner[n] = j;
                    break;
                }

    for (int pass = 0; pass < 2; ++pass)
    {
        auto sets = ac.groups(owner);
        bool ok = true;
        // a subcarrier nobody can use may sit in any set, so count usable ones only
        auto usable_in = [&](std::size_t j) {
            return static_cast<std::size_t>(
                std::count_if(sets[j].begin(), sets[j].end(), [&](std::size_t n) { return ac.usable(j, n); }));
        };
        for (std::size_t j = 0; j < num_messages; ++j)
        {
            if (usable_in(j) > 0)
                continue;
            double best = kInf;
            std::size_t best_n = SIZE_MAX;
            for (std::size_t n = 0; n < n_sc; ++n)
            {
                const std::size_t donor = owner[n];
                if (donor == j || !ac.usable(j, n) || usable_in(donor) < 2)
                    continue;
                std::vector<std::size_t> rest;
                for (auto x : sets[donor])
                    if (x != n)
                        rest.push_back(x);
                const std::size_t single[1] = {n};
                const double delta = ac.cost(j, single) + ac.cost(donor, rest) - ac.cost(donor, sets[donor]);
                if (delta < best)
                {
                    best = delta;
                    best_n = n;
                }
            }
            if (best_n == SIZE_MAX)
            {
                ok = false;
                break;
            }
            const std::size_t donor = owner[best_n];
            std::erase(sets[donor], best_n);
            owner[best_n] = j;
            sets[j].push_back(best_n);
        }
        if (ok)
            return owner;
        for (std::size_t n = 0; n < n_sc; ++n)
            if (skeleton[n] != SIZE_MAX)
                owner[n] = skeleton[n];
    }
    return owner;
}

// First-improvement descent over single reassignments and pairwise swaps.
double local_search(std::vector<std::size_t> &owner, const AssignmentCost &ac, std::size_t num_messages)
{
    const std::size_t n_sc = owner.size();
    auto sets = ac.groups(owner);
    std::vector<double> cost(num_messages);
    for (std::size_t j = 0; j < num_messages; ++j)
        cost[j] = ac.cost(j, sets[j]);

    auto total = [&] {
        double s = 0.0;
        for (double c : cost)
            s += c;
        return s;
    };

    std::vector<std::size_t> a_set, b_set;
    bool improved = true;
    int passes = 0;
    while (improved && passes++ < 1000)
    {
        improved = false;
        for (std::size_t n = 0; n < n_sc; ++n)
        {
            const std::size_t a = owner[n];
            if (sets[a].size() < 2)
                continue;
            a_set.clear();
            for (auto x : sets[a])
                if (x != n)
                    a_set.push_back(x);
            const double cost_a = ac.cost(a, a_set);
            if (!std::isfinite(cost_a))
                continue;
            for (std::size_t j = 0; j < num_messages; ++j)
            {
                if (j == a || !ac.usable(j, n))
                    continue;
                b_set = sets[j];
                b_set.push_back(n);
                const double cost_j = ac.cost(j, b_set);
                const double delta = cost_a + cost_j - cost[a] - cost[j];
                if (delta < -1e-13 * total())
                {
                    sets[a] = a_set;
                    sets[j] = b_set;
                    cost[a] = cost_a;
                    cost[j] = cost_j;
                    owner[n] = j;
                    improved = true;
                    break;
                }
            }
        }
        for (std::size_t n1 = 0; n1 < n_sc; ++n1)
            for (std::size_t n2 = n1 + 1; n2 < n_sc; ++n2)
            {
                const std::size_t a = owner[n1];
                const std::size_t b = owner[n2];
                if (a == b || !ac.usable(a, n2) || !ac.usable(b, n1))
                    continue;
                a_set = sets[a];
                std::replace(a_set.begin(), a_set.end(), n1, n2);
                b_set = sets[b];
                std::replace(b_set.begin(), b_set.end(), n2, n1);
                const double cost_a = ac.cost(a, a_set);
                const double cost_b = ac.cost(b, b_set);
                const double delta = cost_a + cost_b - cost[a] - cost[b];
                if (delta < -1e-13 * total())
                {
                    sets[a] = a_set;
                    sets[b] = b_set;
                    cost[a] = cost_a;
                    cost[b] = cost_b;
                    owner[n1] = b;
                    owner[n2] = a;
                    improved = true;
                }
            }
    }
    return total();
}

// Rotations of three subcarriers among three different owners. Swaps cannot express them, and they
// matter when messages hold a single subcarrier each. Cubic in N, so only the final plan gets them.
bool cycle_search(std::vector<std::size_t> &owner, const AssignmentCost &ac)
{
    const std::size_t n_sc = owner.size();
    auto sets = ac.groups(owner);
    std::vector<double> cost(sets.size());
    double total = 0.0;
    for (std::size_t j = 0; j < sets.size(); ++j)
        total += cost[j] = ac.cost(j, sets[j]);

    std::vector<std::size_t> sa, sb, sc;
    bool any = false;
    for (std::size_t n1 = 0; n1 < n_sc; ++n1)
        for (std::size_t n2 = n1 + 1; n2 < n_sc; ++n2)
            for (std::size_t n3 = n2 + 1; n3 < n_sc; ++n3)
            {
                const std::size_t a = owner[n1], b = owner[n2], c = owner[n3];
                if (a == b || b == c || a == c)
                    continue;
                // forward: n1 -> b, n2 -> c, n3 -> a; backward: n1 -> c, n2 -> a, n3 -> b
                for (int dir = 0; dir < 2; ++dir)
                {
                    const std::size_t to1 = dir == 0 ? b : c, to2 = dir == 0 ? c : a, to3 = dir == 0 ? a : b;
                    if (!ac.usable(to1, n1) || !ac.usable(to2, n2) || !ac.usable(to3, n3))
                        continue;
                    auto moved = [&](std::size_t j, std::vector<std::size_t> &out) {
                        out.clear();
                        for (auto x : sets[j])
                            if (x != n1 && x != n2 && x != n3)
                                out.push_back(x);
                        if (to1 == j)
                            out.push_back(n1);
                        if (to2 == j)
                            out.push_back(n2);
                        if (to3 == j)
                            out.push_back(n3);
                    };
                    moved(a, sa);
                    moved(b, sb);
                    moved(c, sc);
                    const double ca = ac.cost(a, sa), cb = ac.cost(b, sb), cc = ac.cost(c, sc);
                    const double delta = ca + cb + cc - cost[a] - cost[b] - cost[c];
                    if (delta < -1e-13 * total)
                    {
                        owner[n1] = to1;
                        owner[n2] = to2;
                        owner[n3] = to3;
                        sets[a] = sa;
                        sets[b] = sb;
                        sets[c] = sc;
                        total += delta;
                        cost[a] = ca;
                        cost[b] = cb;
                        cost[c] = cc;
                        any = true;
                        break;
                    }
                }
            }
    return any;
}

// Fills power and rate for a fixed assignment with exact per-message water-filling.
void fill_powers(QuotedAllocation &out, std::span<const double> demands, std::span<const double> quotes,
                 double bandwidth_hz)
{
    const std::size_t n_sc = out.n_sc;
    out.power.assign(n_sc, 0.0);
    out.rate.assign(n_sc, 0.0);
    out.sum_power = 0.0;
    std::vector<std::vector<std::size_t>> sets(out.num_messages);
    for (std::size_t n = 0; n < n_sc; ++n)
        sets[out.owner[n]].push_back(n);

    for (std::size_t j = 0; j < out.num_messages; ++j)
    {
        std::vector<double> q;
        for (auto n : sets[j])
            q.push_back(quotes[j * n_sc + n]);
        std::sort(q.begin(), q.end());
        const Level level = waterfill_sorted(q, demands[j] / bandwidth_hz);
        if (!std::isfinite(level.nu))
            throw InfeasibleInstance("message " + std::to_string(j) + " left without a usable subcarrier");
        for (auto n : sets[j])
        {
            const double qn = quotes[j * n_sc + n];
            const double p = std::max(0.0, level.nu - qn);
            out.power[n] = p;
            out.rate[n] = p > 0.0 ? bandwidth_hz * std::log2(1.0 + p / qn) : 0.0;
            out.sum_power += p;
        }
    }
}

} // namespace

double waterfill_power(double gamma, double q, double bandwidth_hz)
{
    return std::max(0.0, gamma * bandwidth_hz / kLn2 - q);
}

double assignment_gain(double gamma, double q, double bandwidth_hz)
{
    if (!std::isfinite(q))
        return 0.0;
    const double p = waterfill_power(gamma, q, bandwidth_hz);
    if (p <= 0.0)
        return 0.0;
    return gamma * bandwidth_hz * std::log2(1.0 + p / q) - p;
}

double waterfill_cost(std::vector<double> quotes, double demand_bits_per_s, double bandwidth_hz)
{
    std::sort(quotes.begin(), quotes.end());
    return waterfill_sorted(quotes, demand_bits_per_s / bandwidth_hz).power;
}

QuotedAllocation solve_quoted_allocation(std::span<const double> demands, std::span<const double> quotes,
                                         std::size_t n_sc, double bandwidth_hz, const AllocationOptions &opt)
{
    check_instance(demands, quotes, n_sc, bandwidth_hz);
    const std::size_t num_messages = demands.size();

    // Work in units where rates are bits/s/Hz and powers are multiples of a typical quote.
    std::vector<double> finite;
    for (double q : quotes)
        if (std::isfinite(q))
            finite.push_back(q);
    std::nth_element(finite.begin(), finite.begin() + finite.size() / 2, finite.end());
    const double q_scale = finite[finite.size() / 2];

    std::vector<double> qn(quotes.size());
    for (std::size_t i = 0; i < quotes.size(); ++i)
        qn[i] = quotes[i] / q_scale;
    std::vector<double> eff(num_messages);
    for (std::size_t j = 0; j < num_messages; ++j)
        eff[j] = demands[j] / bandwidth_hz;

    AssignmentCost ac(qn, eff, n_sc);
    const auto skeleton = skeleton_matching(ac, num_messages, n_sc);

    // Warm start: every subcarrier to its cheapest message, repaired and polished; the prices start at
    // that assignment's water levels (the water level in quote units is gamma / ln 2).
    std::vector<std::size_t> greedy(n_sc, 0);
    for (std::size_t n = 0; n < n_sc; ++n)
        greedy[n] = greedy_owner_of(qn, n, n_sc, num_messages);
    greedy = repair(std::move(greedy), ac, num_messages, skeleton);
    const double greedy_cost = opt.local_search ? local_search(greedy, ac, num_messages) : ac.total(greedy);

    // Second start: the cheapest one-subcarrier-per-message matching, the rest by cheapest quote.
    // Exact when there are as many messages as subcarriers, where single moves are impossible and
    // pairwise swaps cannot close a longer cycle.
    std::vector<std::size_t> matched(n_sc, 0);
    double matched_cost = kInf;
    {
        std::vector<double> single(num_messages * n_sc);
        double worst = 0.0;
        for (std::size_t j = 0; j < num_messages; ++j)
            for (std::size_t n = 0; n < n_sc; ++n)
            {
                const std::size_t one[1] = {n};
                single[j * n_sc + n] = ac.usable(j, n) ? ac.cost(j, one) : kInf;
                if (std::isfinite(single[j * n_sc + n]))
                    worst = std::max(worst, single[j * n_sc + n]);
            }
        bool finite_costs = std::isfinite(worst);
        const double blocked = (worst + 1.0) * static_cast<double>(num_messages + 1);
        for (auto &c : single)
            if (!std::isfinite(c))
                c = blocked;
        if (finite_costs && std::isfinite(blocked))
        {
            const auto match = min_cost_matching(single, num_messages, n_sc);
            for (std::size_t n = 0; n < n_sc; ++n)
                matched[n] = match[n] != SIZE_MAX ? match[n] : greedy_owner_of(qn, n, n_sc, num_messages);
            matched = repair(std::move(matched), ac, num_messages, skeleton);
            matched_cost = opt.local_search ? local_search(matched, ac, num_messages) : ac.total(matched);
        }
    }

    std::vector<double> gamma(num_messages);
    {
        const auto sets = ac.groups(matched_cost < greedy_cost ? matched : greedy);
        for (std::size_t j = 0; j < num_messages; ++j)
            gamma[j] = kLn2 * ac.level(j, sets[j]);
    }

    QuotedAllocation out;
    out.num_messages = num_messages;
    out.n_sc = n_sc;

    std::vector<std::size_t> owner(n_sc, 0), last_owner;
    std::vector<double> served(num_messages);
    std::vector<double> dual_history;
    double best_dual = -kInf;
    std::map<std::vector<std::size_t>, double> candidates;
    std::set<std::vector<std::size_t>> seen;
    candidates.emplace(greedy, greedy_cost);
    if (std::isfinite(matched_cost))
        candidates.emplace(matched, matched_cost);
    bool unique = true;
    bool converged = false;
    int it = 0;

    for (; it < opt.max_iter; ++it)
    {
        std::fill(served.begin(), served.end(), 0.0);
        double gain_sum = 0.0;
        bool unique_now = true;
        for (std::size_t n = 0; n < n_sc; ++n)
        {
            double best = -1.0;
            std::size_t arg = 0;
            bool tie = false;
            for (std::size_t j = 0; j < num_messages; ++j)
            {
                const double g = assignment_gain(gamma[j], qn[j * n_sc + n], 1.0);
                if (g > best)
                {
                    best = g;
                    arg = j;
                    tie = false;
                }
                else if (g == best && g > 0.0)
                    tie = true;
            }
            owner[n] = arg;
            unique_now = unique_now && !tie;
            gain_sum += best;
            const double q = qn[arg * n_sc + n];
            const double p = waterfill_power(gamma[arg], q, 1.0);
            if (p > 0.0)
                served[arg] += std::log2(1.0 + p / q);
        }
        unique = unique_now;

        double dual = -gain_sum;
        for (std::size_t j = 0; j < num_messages; ++j)
            dual += gamma[j] * eff[j];
        best_dual = std::max(best_dual, dual);
        dual_history.push_back(best_dual);

        if (owner != last_owner)
        {
            last_owner = owner;
            if (seen.insert(owner).second)
            {
                auto candidate = repair(owner, ac, num_messages, skeleton);
                const double cost = ac.total(candidate);
                candidates.emplace(std::move(candidate), cost);
            }
        }

        if (it >= opt.window)
        {
            const double then = dual_history[dual_history.size() - 1 - static_cast<std::size_t>(opt.window)];
            if (best_dual - then <= opt.tol * std::abs(best_dual))
            {
                converged = true;
                ++it;
                break;
            }
        }

        // Subgradient step taken in log2(gamma): prices span many decades at high spectral efficiency,
        // where additive steps either crawl or overshoot. Residuals are in bits/s/Hz per subcarrier.
        const double delta = opt.step0 / (1.0 + it / opt.step_tau);
        for (std::size_t j = 0; j < num_messages; ++j)
        {
            const double step = delta * (eff[j] - served[j]) / static_cast<double>(n_sc);
            gamma[j] *= std::exp2(std::clamp(step, -kMaxLogStep, kMaxLogStep));
        }
    }

    // Polish the cheapest few distinct proposals; descent from a single start can stall in a poor basin.
    std::vector<std::pair<double, std::vector<std::size_t>>> ranked;
    for (auto &[own, cost] : candidates)
        ranked.emplace_back(cost, own);
    std::sort(ranked.begin(), ranked.end());
    if (ranked.size() > kPolishStarts)
        ranked.resize(kPolishStarts);
    double best_primal = ranked.front().first;
    std::vector<std::size_t> best_owner = ranked.front().second;
    if (opt.local_search)
        for (auto &[cost, own] : ranked)
        {
            const double polished = local_search(own, ac, num_messages);
            if (polished < best_primal)
            {
                best_primal = polished;
                best_owner = own;
            }
        }

    if (opt.local_search && num_messages >= 3)
        for (int round = 0; round < 100 && cycle_search(best_owner, ac); ++round)
            best_primal = local_search(best_owner, ac, num_messages);

    out.owner = std::move(best_owner);
    out.iterations = it;
    out.unique_argmax = unique;
    fill_powers(out, demands, quotes, bandwidth_hz);
    out.dual_bound = best_dual * q_scale;
    const double gap = (out.sum_power - out.dual_bound) / out.sum_power;
    out.converged = converged || gap <= opt.tol;
    return out;
}

QuotedAllocation brute_force_allocation(std::span<const double> demands, std::span<const double> quotes,
                                        std::size_t n_sc, double bandwidth_hz)
{
    check_instance(demands, quotes, n_sc, bandwidth_hz);
    const std::size_t num_messages = demands.size();

    double count = 1.0;
    for (std::size_t n = 0; n < n_sc; ++n)
        count *= static_cast<double>(num_messages);
    if (count > 1e5)
        throw InstanceTooLarge("brute force limited to 1e5 assignments");

    // Power for message j on the given subcarriers: bisection on the water level until the rate matches.
    auto message_power = [&](std::size_t j, const std::vector<std::size_t> &subcarriers) {
        std::vector<double> q;
        for (auto n : subcarriers)
            if (std::isfinite(quotes[j * n_sc + n]))
                q.push_back(quotes[j * n_sc + n]);
        if (q.empty())
            return kInf;
        const double target = demands[j] / bandwidth_hz;
        auto rate = [&](double nu) {
            double r = 0.0;
            for (double x : q)
                r += std::log2(std::max(1.0, nu / x));
            return r;
        };
        const double qmin = *std::min_element(q.begin(), q.end());
        double lo = qmin;
        double hi = qmin * std::exp2(target);
        for (int i = 0; i < 400 && hi - lo > 1e-16 * hi; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            (rate(mid) >= target ? hi : lo) = mid;
        }
        double p = 0.0;
        for (double x : q)
            p += std::max(0.0, hi - x);
        return p;
    };

    std::vector<std::size_t> owner(n_sc, 0), best_owner;
    double best = kInf;
    while (true)
    {
        std::vector<std::vector<std::size_t>> sets(num_messages);
        for (std::size_t n = 0; n < n_sc; ++n)
            sets[owner[n]].push_back(n);
        double total = 0.0;
        for (std::size_t j = 0; j < num_messages && std::isfinite(total); ++j)
            total += message_power(j, sets[j]);
        if (total < best)
        {
            best = total;
            best_owner = owner;
        }

        std::size_t pos = 0;
        while (pos < n_sc && ++owner[pos] == num_messages)
            owner[pos++] = 0;
        if (pos == n_sc)
            break;
    }
    if (!std::isfinite(best))
        throw InfeasibleInstance("no assignment serves every message");

    QuotedAllocation out;
    out.num_messages = num_messages;
    out.n_sc = n_sc;
    out.owner = best_owner;
    fill_powers(out, demands, quotes, bandwidth_hz);
    out.sum_power = best;
    out.dual_bound = -kInf;
    return out;
}

Allocation assemble_theorem1(const QuotedAllocation &alloc, const BeamPlan &plan, std::size_t m, double bandwidth_hz)
{
    if (plan.num_messages != alloc.num_messages || plan.n_sc != alloc.n_sc ||
        plan.entries.size() != alloc.num_messages * alloc.n_sc)
        throw std::invalid_argument("beam plan does not cover the allocation");

    Allocation out;
    out.num_messages = alloc.num_messages;
    out.n_sc = alloc.n_sc;
    out.m = m;
    out.owner = alloc.owner;
    out.eta = alloc.power;
    out.rate.assign(alloc.n_sc, 0.0);
    out.beam.resize(alloc.n_sc);
    out.converged = alloc.converged;
    out.unique_argmax = alloc.unique_argmax;
    out.iterations = alloc.iterations;

    double sum = 0.0;
    for (std::size_t n = 0; n < alloc.n_sc; ++n)
    {
        const auto &entry = plan.at(alloc.owner[n], n);
        if (entry.w.size() != m)
            throw std::invalid_argument("beam plan entry missing for an assigned pair");
        out.beam[n] = entry.w;
        if (out.eta[n] > 0.0)
            out.rate[n] = bandwidth_hz * std::log2(1.0 + out.eta[n] / entry.q);
        sum += out.eta[n];
    }
    out.total_power_w = sum / static_cast<double>(m);
    return out;
}

std::vector<double> demands_of(std::span<const Message> messages)
{
    std::vector<double> d;
    d.reserve(messages.size());
    for (const auto &msg : messages)
        d.push_back(msg.demand_bits_per_s);
    return d;
}

Allocation solve_fixed_beams(const ChannelState &ch, std::span<const Message> messages, BeamRule rule,
                             const AllocationOptions &opt)
{
    const BeamPlan plan = plan_beams(ch, messages, rule);
    const auto quotes = plan.quotes();
    const auto demands = demands_of(messages);
    const auto quoted = solve_quoted_allocation(demands, quotes, ch.n_sc, ch.bandwidth_hz, opt);
    return assemble_theorem1(quoted, plan, ch.m, ch.bandwidth_hz);
}

} // namespace tilecast
