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

#ifndef TILECAST_DC_SOLVER_HPP
#define TILECAST_DC_SOLVER_HPP

#include "tilecast/beamforming.hpp"
#include "tilecast/channel.hpp"
#include "tilecast/ofdma_alloc.hpp"
#include "tilecast/partition.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace tilecast {

/// Iterate of the relaxed problem in the W = sqrt(eta mu) w variables. Pairs are indexed j * n_sc + n;
/// a zero vector means the pair does not transmit.
struct DcState
{
    std::size_t num_messages = 0;
    std::size_t n_sc = 0;
    std::size_t m = 0;
    std::vector<CVec> w;    // W_{j,n}
    std::vector<double> mu; // relaxed assignment, sums to 1 per subcarrier
    std::vector<double> c;  // bits/s
    int t = 0;
    double objective_w = 0.0; // (1/M) sum ||W||^2

    const CVec &at(std::size_t j, std::size_t n) const { return w[j * n_sc + n]; }
};

/// gamma[j]: price of message j's demand, in watts per (bit/s/Hz).
/// lambda[j * n_sc + n][i]: price of the i-th audience member's decoding constraint on (j, n), in watts.
/// Pairs that do not transmit carry an empty lambda list.
struct DcDuals
{
    std::vector<double> gamma;
    std::vector<std::vector<double>> lambda;
};

/// Constraint residuals, positive when violated, laid out like DcDuals.
using DcResiduals = DcDuals;

enum class DcStart
{
    kBest,       // cheaper of the large-array solution and the principal-eigenvector MRT solution
    kAsymptotic, // large-array solution only
    kRandom,     // random unit beams, allocated optimally
};

struct DcOptions
{
    int outer_max = 100;
    double tol = 1e-4; // relative change of E between outer iterations
    DcStart start = DcStart::kBest;
    std::uint64_t random_seed = 0;
    int recovery_iters = 50;
    double recovery_tol = 1e-9;
    double step0 = 0.5;
    double step_tau = 50.0;
    AllocationOptions alloc;
};

/// Every G on a subcarrier is -infinity: no message can be assigned there.
class NoAssignment : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

DcState state_from_allocation(const Allocation &alloc, const ChannelState &ch, std::span<const Message> messages);

/// Feasible starting point, built from a full binary solution (see DcStart).
DcState initial_point(const ChannelState &ch, std::span<const Message> messages, const DcOptions &opt = {});

/// gamma log2(gamma / (ln2 L)) - gamma B / ln2 + L with L the summed lambda of the pair.
/// L = 0: -infinity when gamma > 0, else 0. gamma = 0: L.
double g_value(double gamma, double lambda_sum, double bandwidth_hz);

struct MuChoice
{
    std::size_t index = 0;
    bool unique = true;
};

/// Argmax of the G values on one subcarrier; ties go to the smallest index and clear `unique`.
/// Throws NoAssignment when every value is -infinity.
MuChoice mu_rule(std::span<const double> g);

/// mu B [log2(gamma / (ln2 L))]^+, zero when mu = 0 or gamma = 0.
double c_rule(double gamma, double lambda_sum, double mu, double bandwidth_hz);

/// Stationary direction d = sum_k lambda_k beta_k h_k (h_k^H W_prev), scaled by the smallest alpha >= 0
/// that makes the linearised decoding constraint hold for every audience member at rate c:
///   mu (2^{c/(B mu)} - 1) <= beta_k (2 Re{W_prev^H h_k h_k^H W} - |h_k^H W_prev|^2) / (m noise).
/// Returns the zero vector when mu = 0 or d = 0. Throws InfeasibleDirection when some member's
/// constraint cannot be met along d.
CVec w_rule(std::span<const double> lambda, std::span<const AudienceChannel> audience, std::span<const cplx> w_prev,
            double mu, double c, std::size_t m, double noise_w, double bandwidth_hz);

/// Projected step: every dual moves by delta times its residual and is clipped at zero.
DcDuals subgrad_step(DcDuals duals, const DcResiduals &residuals, double delta);

struct ConvexApprox
{
    DcState state;
    DcDuals duals;
};

/// Exact solution of the convex approximation linearised at `lin` for lin's assignment: each message
/// water-fills its SNR targets across its subcarriers, and each (message, subcarrier) takes the
/// minimum-norm W meeting the linearised constraints (small active-set QP). Pairs with W = 0 at the
/// linearisation point stay off. Also returns the optimal duals.
ConvexApprox solve_convex_approx(const DcState &lin, const ChannelState &ch, std::span<const Message> messages);

struct DcResult
{
    Allocation allocation;
    DcState state;
    DcDuals duals;
    std::vector<double> objective_history; // E^(0), E^(1), ...
    bool converged = false;
    bool unique_argmax = true;
    bool recovered = false; // final plan came from the dual recovery loop
    int outer_iterations = 0;
};

/// Successive convex approximation from initial_point until E settles, then binary recovery by the
/// per-subcarrier argmax of G with closed-form rates and beams.
DcResult dc_solve(const ChannelState &ch, std::span<const Message> messages, const DcOptions &opt = {});

} // namespace tilecast

#endif
