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

#include "tilecast/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tilecast {

std::vector<AudienceChannel> audience_channels(const ChannelState &ch, const Message &msg, std::size_t n)
{
    std::vector<AudienceChannel> out;
    for (auto k : msg.audience.members())
    {
        if (k >= ch.k_users)
            throw std::out_of_range("audience member outside the channel state");
        out.push_back({ch.h(n, k), ch.beta[k]});
    }
    return out;
}

namespace {

void check_audience(std::span<const AudienceChannel> audience)
{
    if (audience.empty())
        throw std::invalid_argument("audience is empty");
    for (const auto &a : audience)
        if (a.h.size() != audience.front().h.size())
            throw std::invalid_argument("audience channels differ in length");
}

double min_gain(std::span<const cplx> w, std::span<const AudienceChannel> audience)
{
    double g = std::numeric_limits<double>::infinity();
    for (const auto &a : audience)
        g = std::min(g, a.beta * std::norm(cdot(a.h, w)));
    return g;
}

// y = A x with A = sum_k beta_k h_k h_k^H
CVec apply_gram(std::span<const AudienceChannel> audience, std::span<const cplx> x)
{
    CVec y(x.size());
    for (const auto &a : audience)
    {
        const cplx s = a.beta * cdot(a.h, x);
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += s * a.h[i];
    }
    return y;
}

} // namespace

BeamQuote asymptotic_beam(std::span<const AudienceChannel> audience, std::size_t m, double noise_w)
{
    check_audience(audience);
    CVec sum(audience.front().h.size());
    for (const auto &a : audience)
    {
        const double s = 1.0 / std::sqrt(a.beta);
        for (std::size_t i = 0; i < sum.size(); ++i)
            sum[i] += s * a.h[i];
    }
    double scale = 0.0;
    for (const auto &a : audience)
        scale = std::max(scale, cnorm(a.h) / std::sqrt(a.beta));
    if (!(cnorm(sum) > 1e-13 * scale))
        throw DegenerateChannel("audience channels cancel; asymptotic beam undefined");

    BeamQuote out;
    out.w = normalized(sum);
    out.q = quote_for(out.w, audience, m, noise_w);
    return out;
}

CVec mrt_unicast(std::span<const cplx> h)
{
    if (!(cnorm(h) > 0.0))
        throw DegenerateChannel("zero channel has no MRT direction");
    return normalized(h);
}

CVec mrt_multicast(std::span<const AudienceChannel> audience)
{
    check_audience(audience);

    // Every eigenvector with a nonzero eigenvalue lies in the span of the channels, and the principal one
    // has a nonzero component along at least one of them, so starting once from each channel (strongest
    // first) and keeping the largest Rayleigh quotient always finds it.
    std::vector<std::size_t> order(audience.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    auto weight = [&](std::size_t i) { return audience[i].beta * std::pow(cnorm(audience[i].h), 2); };
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return weight(a) > weight(b); });
    if (!(weight(order.front()) > 0.0))
        throw DegenerateChannel("all audience channels are zero");

    constexpr int kMaxIter = 20000;
    constexpr double kTol = 1e-10;

    CVec best;
    double best_value = -1.0;
    for (auto start : order)
    {
        if (!(weight(start) > 0.0))
            continue;
        CVec x = normalized(audience[start].h);
        double value = 0.0;
        for (int it = 0; it < kMaxIter; ++it)
        {
            CVec y = apply_gram(audience, x);
            const double next_value = std::real(cdot(x, y));
            const double ny = cnorm(y);
            if (!(ny > 0.0))
                break;
            for (auto &v : y)
                v /= ny;
            double step = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                step += std::norm(y[i] - x[i]);
            x = std::move(y);
            const bool settled = std::abs(next_value - value) <= kTol * next_value && std::sqrt(step) <= 1e-9;
            value = next_value;
            if (settled)
                break;
        }
        value = std::real(cdot(x, apply_gram(audience, x)));
        if (value > best_value * (1.0 + 1e-12))
        {
            best_value = value;
            best = std::move(x);
        }
        if (audience.size() == 1)
            break;
    }
    return best;
}

CVec weighted_sum_beam(std::span<const AudienceChannel> audience)
{
    check_audience(audience);
    CVec sum(audience.front().h.size());
    for (const auto &a : audience)
    {
        const double s = std::sqrt(a.beta);
        for (std::size_t i = 0; i < sum.size(); ++i)
            sum[i] += s * a.h[i];
    }
    if (!(cnorm(sum) > 0.0))
        throw DegenerateChannel("weighted channel sum vanishes");
    return normalized(sum);
}

double quote_for(std::span<const cplx> w, std::span<const AudienceChannel> audience, std::size_t m, double noise_w)
{
    check_audience(audience);
    const double g = min_gain(w, audience);
    if (!(g > 0.0))
        throw InfeasibleDirection("beam is orthogonal to an audience channel");
    return static_cast<double>(m) * noise_w / g;
}

std::vector<double> BeamPlan::quotes() const
{
    std::vector<double> q(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        q[i] = entries[i].q;
    return q;
}

BeamPlan plan_beams(const ChannelState &ch, std::span<const Message> messages, BeamRule rule)
{
    ch.validate();
    BeamPlan plan;
    plan.num_messages = messages.size();
    plan.n_sc = ch.n_sc;
    plan.entries.resize(messages.size() * ch.n_sc);

    for (std::size_t j = 0; j < messages.size(); ++j)
        for (std::size_t n = 0; n < ch.n_sc; ++n)
        {
            const auto audience = audience_channels(ch, messages[j], n);
            auto &entry = plan.entries[j * ch.n_sc + n];
            try
            {
                switch (rule)
                {
                case BeamRule::kAsymptotic:
                    entry = asymptotic_beam(audience, ch.m, ch.noise_w);
                    continue;
                case BeamRule::kMrtUnicast:
                    if (audience.size() != 1)
                        throw std::invalid_argument("unicast MRT needs single-user audiences");
                    entry.w = mrt_unicast(audience.front().h);
                    break;
                case BeamRule::kMrtPrincipal:
                    entry.w = mrt_multicast(audience);
                    break;
                case BeamRule::kMrtWeightedSum:
                    entry.w = weighted_sum_beam(audience);
                    break;
                }
                entry.q = quote_for(entry.w, audience, ch.m, ch.noise_w);
            }
            catch (const std::domain_error &)
            {
                // measure-zero degeneracy: this pair cannot be used
                if (entry.w.empty())
                {
                    entry.w.assign(ch.m, cplx{0.0, 0.0});
                    entry.w[0] = 1.0;
                }
                entry.q = std::numeric_limits<double>::infinity();
            }
        }
    return plan;
}

} // namespace tilecast
