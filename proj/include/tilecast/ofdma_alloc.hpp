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

#ifndef TILECAST_OFDMA_ALLOC_HPP
#define TILECAST_OFDMA_ALLOC_HPP

#include "tilecast/beamforming.hpp"
#include "tilecast/cxkernel.hpp"
#include "tilecast/partition.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tilecast {

class InfeasibleInstance : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class InstanceTooLarge : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Power that minimises P - gamma * B * log2(1 + P/q): max(0, gamma B / ln 2 - q).
double waterfill_power(double gamma, double q, double bandwidth_hz);

/// gamma * B * log2(1 + P*/q) - P* at the water-filling power P*. Zero below the water level.
double assignment_gain(double gamma, double q, double bandwidth_hz);

/// Subcarrier assignment plus power/rate split for fixed power quotes. Each subcarrier carries exactly
/// one message (owner[n]); power and rate are those of the owning pair, every other pair is zero.
struct QuotedAllocation
{
    std::size_t num_messages = 0;
    std::size_t n_sc = 0;
    std::vector<std::size_t> owner;
    std::vector<double> power; // P (equivalently eta) of the owning pair
    std::vector<double> rate;  // bits/s of the owning pair
    double sum_power = 0.0;    // sum of P over all pairs
    double dual_bound = 0.0;   // best Lagrangian lower bound on sum_power seen by the solver
    bool converged = true;
    bool unique_argmax = true;
    int iterations = 0;

    double mu(std::size_t j, std::size_t n) const { return owner[n] == j ? 1.0 : 0.0; }
};

struct AllocationOptions
{
    int max_iter = 5000;
    double tol = 1e-6;     // relative change of the dual objective over `window` iterations
    int window = 20;
    double step0 = 0.5;    // delta_i = step0 / (1 + i / step_tau); log2(gamma_j) moves by delta_i * residual_j / N
    double step_tau = 50.0;
    bool local_search = true;
};

/// Minimum-sum-power binary subcarrier assignment with rate demands, for quotes indexed j * n_sc + n
/// (+infinity marks an unusable pair). Dual decomposition (per-subcarrier argmax of the water-filling
/// gain, projected subgradient on the demand prices) proposes assignments; every proposal is priced with
/// exact per-message water-filling and the best one is polished by single moves and pairwise swaps.
/// Throws InfeasibleInstance when no assignment can give every message a usable subcarrier.
QuotedAllocation solve_quoted_allocation(std::span<const double> demands, std::span<const double> quotes,
                                         std::size_t n_sc, double bandwidth_hz, const AllocationOptions &opt = {});

/// Exhaustive reference: enumerates every assignment (at most 1e5 of them) and water-fills each message
/// by bisection on its water level.
QuotedAllocation brute_force_allocation(std::span<const double> demands, std::span<const double> quotes,
                                        std::size_t n_sc, double bandwidth_hz);

/// Minimum total water-filling power for one message given the quotes of its subcarriers and its demand.
/// Closed form over the sorted quotes; returns +infinity if no quote is finite.
double waterfill_cost(std::vector<double> quotes, double demand_bits_per_s, double bandwidth_hz);

/// A complete transmission plan: assignment, powers eta, rates and one unit beam per subcarrier.
struct Allocation
{
    std::size_t num_messages = 0;
    std::size_t n_sc = 0;
    std::size_t m = 1;
    std::vector<std::size_t> owner;
    std::vector<double> eta;
    std::vector<double> rate;
    std::vector<CVec> beam;
    double total_power_w = 0.0; // (1/M) sum of eta
    bool converged = true;
    bool unique_argmax = true;
    int iterations = 0;

    double mu(std::size_t j, std::size_t n) const { return owner[n] == j ? 1.0 : 0.0; }
};

/// Lifts a quoted allocation to a full plan: w_n is the beam of the message assigned to n, eta = P and
/// c = B log2(1 + P/Q) on the assigned pairs.
Allocation assemble_theorem1(const QuotedAllocation &alloc, const BeamPlan &plan, std::size_t m, double bandwidth_hz);

std::vector<double> demands_of(std::span<const Message> messages);

/// Beams by `rule`, quotes, optimal quoted allocation and the lift to a full plan in one call.
Allocation solve_fixed_beams(const ChannelState &ch, std::span<const Message> messages, BeamRule rule,
                             const AllocationOptions &opt = {});

} // namespace tilecast

#endif
