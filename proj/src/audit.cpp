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

#include <cmath>
#include <sstream>

namespace tilecast {

namespace {

void flag(AuditReport &r, const std::string &what)
{
    if (r.violations.size() < 32)
        r.violations.push_back(what);
}

void check_demands(AuditReport &r, std::span<const double> demands, std::span<const std::size_t> owner,
                   std::span<const double> rate, double rel_tol)
{
    std::vector<double> served(demands.size(), 0.0);
    for (std::size_t n = 0; n < owner.size(); ++n)
        if (owner[n] < demands.size())
            served[owner[n]] += rate[n];
    for (std::size_t j = 0; j < demands.size(); ++j)
    {
        const double shortfall = (demands[j] - served[j]) / demands[j];
        r.worst_demand_short = std::max(r.worst_demand_short, shortfall);
        if (!(shortfall <= rel_tol))
            flag(r, "message " + std::to_string(j) + " served " + std::to_string(served[j]) + " of " +
                        std::to_string(demands[j]) + " bit/s");
    }
}

} // namespace

std::string AuditReport::summary() const
{
    if (ok())
        return "ok";
    std::ostringstream os;
    os << violations.size() << " violation(s): " << violations.front();
    return os.str();
}

AuditReport audit_quoted(const QuotedAllocation &alloc, std::span<const double> demands,
                         std::span<const double> quotes, double bandwidth_hz, double rel_tol)
{
    AuditReport r;
    const std::size_t n_sc = alloc.n_sc;
    if (alloc.owner.size() != n_sc || alloc.power.size() != n_sc || alloc.rate.size() != n_sc ||
        alloc.num_messages != demands.size() || quotes.size() != demands.size() * n_sc)
    {
        flag(r, "allocation shape does not match the instance");
        return r;
    }
    double sum = 0.0;
    for (std::size_t n = 0; n < n_sc; ++n)
    {
        const std::size_t j = alloc.owner[n];
        if (j >= alloc.num_messages)
        {
            flag(r, "subcarrier " + std::to_string(n) + " has no valid owner");
            continue;
        }
        const double p = alloc.power[n];
        if (!(p >= 0.0) || !std::isfinite(p))
            flag(r, "subcarrier " + std::to_string(n) + " has invalid power");
        if (!(alloc.rate[n] >= 0.0))
            flag(r, "subcarrier " + std::to_string(n) + " has negative rate");
        const double q = quotes[j * n_sc + n];
        const double cap = std::isfinite(q) ? bandwidth_hz * std::log2(1.0 + p / q) : 0.0;
        const double excess = alloc.rate[n] - cap;
        if (excess > 0.0)
        {
            const double rel = excess / std::max(cap, demands[j]);
            r.worst_rate_slack = std::max(r.worst_rate_slack, rel);
            if (rel > rel_tol)
                flag(r, "subcarrier " + std::to_string(n) + " rate exceeds B log2(1 + P/q)");
        }
        sum += p;
    }
    if (std::abs(sum - alloc.sum_power) > rel_tol * std::max(sum, 1e-300))
        flag(r, "sum_power does not match the per-subcarrier powers");
    check_demands(r, demands, alloc.owner, alloc.rate, rel_tol);
    return r;
}

AuditReport audit_allocation(const Allocation &alloc, const ChannelState &ch, std::span<const Message> messages,
                             double rel_tol)
{
    AuditReport r;
    const std::size_t n_sc = alloc.n_sc;
    if (alloc.owner.size() != n_sc || alloc.eta.size() != n_sc || alloc.rate.size() != n_sc ||
        alloc.beam.size() != n_sc || alloc.num_messages != messages.size() || n_sc != ch.n_sc || alloc.m != ch.m)
    {
        flag(r, "allocation shape does not match the instance");
        return r;
    }
    const double m = static_cast<double>(ch.m);
    double sum = 0.0;
    for (std::size_t n = 0; n < n_sc; ++n)
    {
        const std::size_t j = alloc.owner[n];
        const std::string where = "subcarrier " + std::to_string(n);
        if (j >= messages.size())
        {
            flag(r, where + " has no valid owner");
            continue;
        }
        const double eta = alloc.eta[n];
        if (!(eta >= 0.0) || !std::isfinite(eta))
            flag(r, where + " has invalid power");
        if (!(alloc.rate[n] >= 0.0) || !std::isfinite(alloc.rate[n]))
            flag(r, where + " has invalid rate");
        if (alloc.beam[n].size() != ch.m || std::abs(cnorm(alloc.beam[n]) - 1.0) > 1e-9)
        {
            flag(r, where + " beam is not unit norm");
            continue;
        }
        sum += eta;
        if (alloc.rate[n] <= 0.0)
            continue;
        for (auto k : messages[j].audience.members())
        {
            const double gain = ch.beta[k] * std::norm(cdot(ch.h(n, k), alloc.beam[n]));
            const double cap = ch.bandwidth_hz * std::log2(1.0 + eta * gain / (m * ch.noise_w));
            const double excess = alloc.rate[n] - cap;
            if (excess > 0.0)
            {
                const double rel = excess / alloc.rate[n];
                r.worst_rate_slack = std::max(r.worst_rate_slack, rel);
                if (rel > rel_tol)
                    flag(r, where + ": user " + std::to_string(k + 1) + " cannot decode message " + std::to_string(j));
            }
        }
    }
    if (std::abs(sum / m - alloc.total_power_w) > rel_tol * std::max(sum / m, 1e-300))
        flag(r, "total_power_w does not match (1/M) sum eta");
    check_demands(r, demands_of(messages), alloc.owner, alloc.rate, rel_tol);
    return r;
}

} // namespace tilecast
