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

#include "tilecast/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tilecast {

std::span<const cplx> ChannelState::h(std::size_t n, std::size_t k) const
{
    return {coeffs.data() + (k * n_sc + n) * m, m};
}

std::span<cplx> ChannelState::h(std::size_t n, std::size_t k)
{
    return {coeffs.data() + (k * n_sc + n) * m, m};
}

void ChannelState::validate() const
{
    if (m == 0 || n_sc == 0 || k_users == 0)
        throw std::invalid_argument("channel dimensions must be at least 1");
    if (!(noise_w > 0.0) || !(bandwidth_hz > 0.0))
        throw std::invalid_argument("noise power and bandwidth must be positive");
    if (beta.size() != k_users)
        throw std::invalid_argument("need one large-scale gain per user");
    for (double b : beta)
        if (!(b > 0.0) || !std::isfinite(b))
            throw std::invalid_argument("large-scale gains must be positive");
    if (coeffs.size() != m * n_sc * k_users)
        throw std::invalid_argument("channel coefficient array has the wrong size");
}

std::uint64_t splitmix64_mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next()
{
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
}

double SplitMix64::uniform_open0()
{
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t SplitMix64::below(std::uint64_t bound)
{
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
    std::uint64_t x;
    do
        x = next();
    while (x >= limit);
    return x % bound;
}

cplx complex_gaussian(SplitMix64 &gen)
{
    const double u1 = gen.uniform_open0();
    const double u2 = gen.uniform_open0();
    const double r = std::sqrt(-std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

ChannelState sample_channel(std::uint64_t seed, const ChannelSpec &spec)
{
    ChannelState ch;
    ch.m = spec.m;
    ch.n_sc = spec.n_sc;
    ch.k_users = spec.k_users;
    ch.noise_w = spec.noise_w;
    ch.bandwidth_hz = spec.bandwidth_hz;
    ch.beta = spec.beta.empty() ? std::vector<double>(spec.k_users, 1.0) : spec.beta;
    if (ch.beta.size() < ch.k_users)
        throw std::invalid_argument("need one large-scale gain per user");
    ch.beta.resize(ch.k_users);
    ch.coeffs.resize(ch.m * ch.n_sc * ch.k_users);
    ch.validate();

    for (std::size_t k = 0; k < ch.k_users; ++k)
        for (std::size_t n = 0; n < ch.n_sc; ++n)
        {
            SplitMix64 gen(splitmix64_mix(seed ^ splitmix64_mix((std::uint64_t{k} << 32) | n)));
            for (auto &x : ch.h(n, k))
                x = complex_gaussian(gen);
        }
    return ch;
}

std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial_index)
{
    return splitmix64_mix(splitmix64_mix(base_seed) + trial_index * 0x9E3779B97F4A7C15ULL);
}

} // namespace tilecast
