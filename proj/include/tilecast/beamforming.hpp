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

#ifndef TILECAST_BEAMFORMING_HPP
#define TILECAST_BEAMFORMING_HPP

#include "tilecast/channel.hpp"
#include "tilecast/cxkernel.hpp"
#include "tilecast/partition.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace tilecast {

/// Channel of one audience member on one subcarrier.
struct AudienceChannel
{
    std::span<const cplx> h;
    double beta = 1.0;
};

std::vector<AudienceChannel> audience_channels(const ChannelState &ch, const Message &msg, std::size_t n);

/// A unit beam direction and its power quote q: with transmit parameter P on this direction every
/// audience member decodes at rate >= B log2(1 + P/q), the weakest one with equality.
struct BeamQuote
{
    CVec w;
    double q = 0.0;
};

/// The audience channels sum to (numerically) zero, so no direction can be formed.
class DegenerateChannel : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// Some audience member is orthogonal to the beam, so no finite power serves it.
class InfeasibleDirection : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

/// Large-array beam for a multicast audience: direction along sum_k h_k / sqrt(beta_k), power set by
/// the weakest member. Collapses to MRT for a single user.
BeamQuote asymptotic_beam(std::span<const AudienceChannel> audience, std::size_t m, double noise_w);

/// h / ||h||.
CVec mrt_unicast(std::span<const cplx> h);

/// Unit principal eigenvector of sum_k beta_k h_k h_k^H (power iteration).
CVec mrt_multicast(std::span<const AudienceChannel> audience);

/// Normalised beta-weighted channel sum, sum_k sqrt(beta_k) h_k.
CVec weighted_sum_beam(std::span<const AudienceChannel> audience);

/// q = m * noise / min_k beta_k |h_k^H w|^2 for a unit direction w.
double quote_for(std::span<const cplx> w, std::span<const AudienceChannel> audience, std::size_t m, double noise_w);

enum class BeamRule
{
    kAsymptotic,
    kMrtUnicast,
    kMrtPrincipal,
    kMrtWeightedSum,
};

/// Beams and quotes for every (message, subcarrier), indexed j * n_sc + n. Quotes for directions that
/// miss an audience member are +infinity.
struct BeamPlan
{
    std::size_t num_messages = 0;
    std::size_t n_sc = 0;
    std::vector<BeamQuote> entries;

    const BeamQuote &at(std::size_t j, std::size_t n) const { return entries[j * n_sc + n]; }
    std::vector<double> quotes() const;
};

BeamPlan plan_beams(const ChannelState &ch, std::span<const Message> messages, BeamRule rule);

} // namespace tilecast

#endif
