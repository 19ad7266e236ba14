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

#ifndef TILECAST_CHANNEL_HPP
#define TILECAST_CHANNEL_HPP

#include "tilecast/cxkernel.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tilecast {

/// System channel state: small-scale vectors h_{n,k} in C^m for every (subcarrier, user), plus the
/// per-user large-scale gains, noise power and subcarrier bandwidth.
struct ChannelState
{
    std::size_t m = 0;
    std::size_t n_sc = 0;
    std::size_t k_users = 0;
    double bandwidth_hz = 0.0;
    double noise_w = 0.0;
    std::vector<double> beta;
    std::vector<cplx> coeffs; // user-major: index ((k * n_sc) + n) * m + i

    std::span<const cplx> h(std::size_t n, std::size_t k) const;
    std::span<cplx> h(std::size_t n, std::size_t k);
    void validate() const;
};

struct ChannelSpec
{
    std::size_t m = 4;
    std::size_t n_sc = 16;
    std::size_t k_users = 1;
    std::vector<double> beta; // empty means beta_k = 1 for every user
    double noise_w = 1e-9;
    double bandwidth_hz = 39e3;
};

/// SplitMix64 (Steele, Lea and Flood). Small, fast and fully specified, which keeps the
/// channel streams reproducible across compilers and standard libraries.
class SplitMix64
{
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    // Uniform on (0, 1]: 53 random bits.
    double uniform_open0();
    // Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

  private:
    std::uint64_t state_;
};

std::uint64_t splitmix64_mix(std::uint64_t x);

/// Circularly-symmetric complex Gaussian with unit variance (1/2 per real dimension):
/// r = sqrt(-ln u1), theta = 2 pi u2, result r * (cos theta + i sin theta).
cplx complex_gaussian(SplitMix64 &gen);

/// Channel stream "tilecast-cn/1". Each vector h_{n,k} is drawn from its own SplitMix64 stream seeded
/// with splitmix64_mix(seed ^ splitmix64_mix((k << 32) | n)), one complex_gaussian per antenna in order.
/// Streams are therefore independent of the other dimensions: the first m' entries for m' < m, the
/// first users and the first subcarriers coincide across differently sized draws with the same seed.
ChannelState sample_channel(std::uint64_t seed, const ChannelSpec &spec);

/// Seed for trial `trial_index`: splitmix64_mix(splitmix64_mix(base_seed) + trial_index * 0x9E3779B97F4A7C15).
/// Injective in the trial index for a fixed base seed. Stable across releases.
std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial_index);

} // namespace tilecast

#endif
