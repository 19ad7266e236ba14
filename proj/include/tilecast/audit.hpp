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

#ifndef TILECAST_AUDIT_HPP
#define TILECAST_AUDIT_HPP

#include "tilecast/channel.hpp"
#include "tilecast/ofdma_alloc.hpp"
#include "tilecast/partition.hpp"

#include <span>
#include <string>
#include <vector>

namespace tilecast {

struct AuditReport
{
    std::vector<std::string> violations;
    double worst_rate_slack = 0.0;   // largest relative rate excess over what some audience member can decode
    double worst_demand_short = 0.0; // largest relative demand shortfall

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

/// Checks a quoted allocation: one owner per subcarrier, nonnegative finite powers, rates consistent with
/// B log2(1 + P/q), and every demand met to `rel_tol`.
AuditReport audit_quoted(const QuotedAllocation &alloc, std::span<const double> demands,
                         std::span<const double> quotes, double bandwidth_hz, double rel_tol = 1e-6);

/// Checks a full plan against the channel: binary assignment with exactly one message per subcarrier,
/// nonnegative eta and c, unit beams (1e-9), every audience member able to decode the rate of its
/// message on each subcarrier, and every demand met, all to `rel_tol`.
AuditReport audit_allocation(const Allocation &alloc, const ChannelState &ch, std::span<const Message> messages,
                             double rel_tol = 1e-6);

} // namespace tilecast

#endif
