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

#include "tilecast/dc_solver.hpp"

#include "tilecast/audit.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

namespace tilecast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;

// Scaled variables V = W / sqrt(m noise) keep everything O(1): the linearised constraint of audience
// member k reads Re<b_k, V> >= (y + e_k) / 2 with b_k = beta_k h_k (h_k^H V_prev), e_k = beta_k |h_k^H V_prev|^2
// and y the SNR target 2^{c/B} - 1. The minimum-norm V lies in span{b_k}: V = sum rho_k b_k, and for a
// fixed set of tight constraints rho is affine in y.
class PairQp
{
  public:
    struct Solution
    {
        double norm2 = 0.0;
        double rho_sum = 0.0;
        std::vector<double> rho; // one per audience member, zero for members left out of the QP
    };

    PairQp(std::span<const AudienceChannel> audience, std::span<const cplx> v_prev)
    {
        const std::size_t k_all = audience.size();
        full_size_ = k_all;
        double e_max = 0.0;
        std::vector<double> e_all(k_all);
        std::vector<CVec> b_all(k_all);
        for (std::size_t k = 0; k < k_all; ++k)
        {
            const cplx hv = cdot(audience[k].h, v_prev);
            e_all[k] = audience[k].beta * std::norm(hv);
            b_all[k].resize(v_prev.size());
            for (std::size_t i = 0; i < v_prev.size(); ++i)
                b_all[k][i] = audience[k].beta * hv * audience[k].h[i];
            e_max = std::max(e_max, e_all[k]);
        }
        for (std::size_t k = 0; k < k_all; ++k)
        {
            // a member orthogonal to V_prev cannot be served by the linearisation at all
            if (e_all[k] <= 1e-14 * e_max)
            {
                pinned_ = true;
                continue;
            }
            slot_.push_back(k);
            b_.push_back(std::move(b_all[k]));
            e_.push_back(e_all[k]);
        }
        const std::size_t kk = b_.size();
        gram_.assign(kk * kk, 0.0);
        for (std::size_t a = 0; a < kk; ++a)
            for (std::size_t c = 0; c < kk; ++c)
                gram_[a * kk + c] = cdot(b_[a], b_[c]).real();
        for (unsigned mask = 1; mask < (1u << kk); ++mask)
        {
            Subset s;
            for (std::size_t a = 0; a < kk; ++a)
                if ((mask >> a) & 1u)
                    s.idx.push_back(a);
            if (prepare(s))
                subsets_.push_back(std::move(s));
        }
        rho_.assign(kk, 0.0);
    }

    bool dead() const { return b_.empty(); }
    bool pinned() const { return pinned_; } // only y = 0 is reachable

    // Sum of rho at the optimum for target y (updates the cached active set).
    double rho_sum(double y) const
    {
        locate(y);
        double sum = 0.0;
        for (double r : rho_)
            sum += r;
        return sum;
    }

    // ln2 (1 + y) sum rho: derivative of the pair's power with respect to log2(1 + y), in scaled units.
    double phi(double y) const { return kLn2 * (1.0 + y) * rho_sum(y); }

    // y >= 0 with phi(y) = g, or 0 when phi(0) >= g.
    double solve_snr(double g, double hint) const
    {
        if (pinned_)
            return 0.0;
        const double f0 = phi(0.0) - g;
        if (f0 >= 0.0)
            return 0.0;
        // within one active set, phi is the quadratic ln2 (1 + y)(su y + sv)
        for (int round = 0; round < 8 && warm_ < subsets_.size(); ++round)
        {
            const Subset &s = subsets_[warm_];
            const double a = s.su;
            const double b = s.su + s.sv;
            const double c = s.sv - g / kLn2;
            double y;
            if (a > 0.0)
            {
                const double disc = b * b - 4.0 * a * c;
                if (disc < 0.0)
                    break;
                y = (-b + std::sqrt(disc)) / (2.0 * a);
                if (b > 0.0)
                    y = 2.0 * c / (-b - std::sqrt(disc)); // same root, no cancellation
            }
            else if (b > 0.0)
                y = -c / b;
            else
                break;
            if (!(y >= 0.0) || !std::isfinite(y))
                break;
            const std::size_t before = warm_;
            if (kkt_point(s, y))
                return y;
            locate(y);
            if (warm_ == before)
                break;
        }
        return bracketed(g, hint, f0);
    }

    Solution solve(double y) const
    {
        Solution out;
        out.norm2 = locate(y);
        out.rho.assign(full_size_, 0.0);
        for (std::size_t a = 0; a < rho_.size(); ++a)
        {
            out.rho[slot_[a]] = rho_[a];
            out.rho_sum += rho_[a];
        }
        return out;
    }

    CVec combine(const Solution &s) const
    {
        CVec v(b_.empty() ? 0 : b_.front().size(), cplx{0.0, 0.0});
        for (std::size_t a = 0; a < b_.size(); ++a)
        {
            const double r = s.rho[slot_[a]];
            if (r == 0.0)
                continue;
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] += r * b_[a][i];
        }
        return v;
    }

  private:
    static constexpr double kFeasTol = 1e-11;

    struct Subset
    {
        std::vector<std::size_t> idx;
        std::vector<double> inv;
        double su = 0.0; // d(sum rho)/dy
        double sv = 0.0; // sum rho at y = 0
    };

    double bracketed(double g, double hint, double f0) const
    {
        using boost::math::tools::eps_tolerance;
        using boost::math::tools::toms748_solve;
        double lo = 0.0;
        double flo = f0;
        double hi = std::max(hint, 1e-3);
        double fhi = phi(hi) - g;
        for (int i = 0; fhi < 0.0; ++i)
        {
            if (i > 2000)
                throw std::runtime_error("SNR bracket search failed");
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = phi(hi) - g;
        }
        if (fhi == 0.0)
            return hi;
        std::uintmax_t iters = 200;
        const auto r = toms748_solve([&](double y) { return phi(y) - g; }, lo, hi, flo, fhi,
                                     eps_tolerance<double>(50), iters);
        return r.second;
    }

    bool prepare(Subset &s) const
    {
        const std::size_t kk = b_.size();
        const std::size_t n = s.idx.size();
        std::vector<double> a(n * n), inv(n * n, 0.0);
        double diag = 0.0;
        for (std::size_t r = 0; r < n; ++r)
        {
            for (std::size_t c = 0; c < n; ++c)
                a[r * n + c] = gram_[s.idx[r] * kk + s.idx[c]];
            inv[r * n + r] = 1.0;
            diag = std::max(diag, a[r * n + r]);
        }
        for (std::size_t col = 0; col < n; ++col)
        {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col]))
                    piv = r;
            if (std::abs(a[piv * n + col]) <= 1e-10 * diag)
                return false;
            for (std::size_t c = 0; c < n; ++c)
            {
                std::swap(a[col * n + c], a[piv * n + c]);
                std::swap(inv[col * n + c], inv[piv * n + c]);
            }
            const double p = a[col * n + col];
            for (std::size_t c = 0; c < n; ++c)
            {
                a[col * n + c] /= p;
                inv[col * n + c] /= p;
            }
            for (std::size_t r = 0; r < n; ++r)
            {
                if (r == col)
                    continue;
                const double f = a[r * n + col];
                if (f == 0.0)
                    continue;
                for (std::size_t c = 0; c < n; ++c)
                {
                    a[r * n + c] -= f * a[col * n + c];
                    inv[r * n + c] -= f * inv[col * n + c];
                }
            }
        }
        s.inv = std::move(inv);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
            {
                s.su += 0.5 * s.inv[r * n + c];
                s.sv += 0.5 * s.inv[r * n + c] * e_[s.idx[c]];
            }
        return true;
    }

    // Tight constraints on the subset: fills rho_ and returns the worst relative violation of the
    // others; `norm2` receives ||V||^2.
    double trial(const Subset &s, double y, double &norm2) const
    {
        const std::size_t kk = b_.size();
        const std::size_t n = s.idx.size();
        std::fill(rho_.begin(), rho_.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r)
        {
            double acc = 0.0;
            for (std::size_t c = 0; c < n; ++c)
                acc += s.inv[r * n + c] * 0.5 * (y + e_[s.idx[c]]);
            rho_[s.idx[r]] = acc;
        }
        double violation = 0.0;
        norm2 = 0.0;
        for (std::size_t a = 0; a < kk; ++a)
        {
            double lhs = 0.0;
            for (std::size_t c = 0; c < kk; ++c)
                lhs += gram_[a * kk + c] * rho_[c];
            const double rhs = 0.5 * (y + e_[a]);
            violation = std::max(violation, (rhs - lhs) / rhs);
            norm2 += rho_[a] * lhs;
        }
        return violation;
    }

    // Optimality check: primal feasible with nonnegative multipliers.
    bool kkt_point(const Subset &s, double y) const
    {
        double norm2;
        if (trial(s, y, norm2) > kFeasTol)
            return false;
        double scale = 0.0;
        for (double r : rho_)
            scale = std::max(scale, std::abs(r));
        for (double r : rho_)
            if (r < -1e-12 * scale)
                return false;
        return true;
    }

    // Finds the optimal active set for y (warm set first, then the cheapest primal-feasible subset; the
    // minimum-norm point of any feasible subset bounds the optimum from above, and the optimal subset
    // attains it). Leaves rho_ at the optimum and returns ||V||^2.
    double locate(double y) const
    {
        double norm2 = 0.0;
        if (warm_ < subsets_.size() && kkt_point(subsets_[warm_], y))
        {
            trial(subsets_[warm_], y, norm2);
            return norm2;
        }
        double best = kInf;
        double least = kInf;
        std::size_t best_i = SIZE_MAX;
        std::size_t fallback = 0;
        for (std::size_t i = 0; i < subsets_.size(); ++i)
        {
            const double violation = trial(subsets_[i], y, norm2);
            if (violation <= kFeasTol)
            {
                if (norm2 < best)
                {
                    best = norm2;
                    best_i = i;
                }
            }
            else if (violation < least)
            {
                least = violation;
                fallback = i;
            }
        }
        warm_ = best_i == SIZE_MAX ? fallback : best_i;
        trial(subsets_[warm_], y, norm2);
        return norm2;
    }

    std::size_t full_size_ = 0;
    std::vector<std::size_t> slot_;
    std::vector<CVec> b_;
    std::vector<double> e_;
    std::vector<double> gram_;
    std::vector<Subset> subsets_;
    bool pinned_ = false;
    mutable std::vector<double> rho_;
    mutable std::size_t warm_ = SIZE_MAX;
};

using boost::math::tools::eps_tolerance;
using boost::math::tools::toms748_solve;

struct MessageWork
{
    std::vector<std::size_t> subcarriers;
    std::vector<PairQp> qps;
    std::vector<double> hint;
};

// Price g (scaled units) at which the message exactly meets `target` bits/s/Hz; fills y.
double solve_message(MessageWork &mw, double target, std::vector<double> &y)
{
    y.assign(mw.qps.size(), 0.0);
    auto rate_at = [&](double g) {
        double r = 0.0;
        for (std::size_t i = 0; i < mw.qps.size(); ++i)
        {
            y[i] = mw.qps[i].solve_snr(g, mw.hint[i]);
            r += std::log2(1.0 + y[i]);
        }
        return r - target;
    };

    double hi = 0.0;
    for (std::size_t i = 0; i < mw.qps.size(); ++i)
        if (!mw.qps[i].pinned())
            hi = std::max(hi, mw.qps[i].phi(mw.hint[i]));
    if (!(hi > 0.0))
        throw std::runtime_error("message has no live subcarrier to carry its demand");
    double lo = 0.0;
    double flo = -target;
    double fhi = rate_at(hi);
    for (int i = 0; fhi < 0.0; ++i)
    {
        if (i > 2000)
            throw std::runtime_error("demand price bracket search failed");
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = rate_at(hi);
    }
    double g = hi;
    if (fhi > 0.0)
    {
        std::uintmax_t iters = 200;
        const auto r = toms748_solve(rate_at, lo, hi, flo, fhi, eps_tolerance<double>(50), iters);
        g = r.second;
    }
    double served = rate_at(g);
    if (served < 0.0)
    {
        // rounding left the message a hair short: top up its best subcarrier
        const auto top = std::max_element(y.begin(), y.end()) - y.begin();
        y[top] = std::exp2(std::log2(1.0 + y[top]) - served) - 1.0;
    }
    return g;
}

Allocation allocation_from_state(const DcState &s, const ChannelState &ch)
{
    Allocation a;
    a.num_messages = s.num_messages;
    a.n_sc = s.n_sc;
    a.m = s.m;
    a.owner.assign(s.n_sc, 0);
    a.eta.assign(s.n_sc, 0.0);
    a.rate.assign(s.n_sc, 0.0);
    a.beam.resize(s.n_sc);
    double sum = 0.0;
    for (std::size_t n = 0; n < s.n_sc; ++n)
    {
        std::size_t owner = 0;
        for (std::size_t j = 0; j < s.num_messages; ++j)
            if (s.mu[j * s.n_sc + n] > s.mu[owner * s.n_sc + n])
                owner = j;
        a.owner[n] = owner;
        const CVec &w = s.at(owner, n);
        const double norm = cnorm(w);
        const double c = s.c[owner * s.n_sc + n];
        if (norm > 0.0 && c > 0.0)
        {
            a.beam[n] = normalized(w);
            a.eta[n] = norm * norm;
            a.rate[n] = c;
            sum += a.eta[n];
        }
        else
        {
            a.beam[n].assign(ch.m, cplx{0.0, 0.0});
            a.beam[n][0] = 1.0;
        }
    }
    a.total_power_w = sum / static_cast<double>(s.m);
    return a;
}

double objective(const DcState &s)
{
    double sum = 0.0;
    for (const auto &w : s.w)
        for (const auto &x : w)
            sum += std::norm(x);
    return sum / static_cast<double>(s.m);
}

// Linearised constraint slack for one member, positive when violated:
// (y + beta |h^H W_lin|^2 / (m noise)) - 2 beta Re{W_lin^H h h^H W} / (m noise).
double linear_violation(const AudienceChannel &a, std::span<const cplx> w_lin, std::span<const cplx> w, double y,
                        double m_noise)
{
    const cplx hl = cdot(a.h, w_lin);
    const cplx hw = cdot(a.h, w);
    const double e = a.beta * std::norm(hl) / m_noise;
    const double lin = 2.0 * a.beta * (std::conj(hl) * hw).real() / m_noise;
    return y + e - lin;
}

struct Recovery
{
    Allocation allocation;
    bool unique = true;
    bool ok = false;
};

// Binary recovery from the duals of the last convex approximation (linearised at `lin`).
Recovery recover(const DcState &lin, DcDuals duals, const ChannelState &ch, std::span<const Message> messages,
                 const DcOptions &opt)
{
    const std::size_t n_sc = lin.n_sc;
    const std::size_t num = lin.num_messages;
    const double m_noise = static_cast<double>(ch.m) * ch.noise_w;
    const double b_hz = ch.bandwidth_hz;
    const auto demands = demands_of(messages);

    std::vector<std::size_t> incumbent(n_sc, 0);
    for (std::size_t n = 0; n < n_sc; ++n)
        for (std::size_t j = 0; j < num; ++j)
            if (lin.mu[j * n_sc + n] > lin.mu[incumbent[n] * n_sc + n])
                incumbent[n] = j;

    const DcDuals ref = duals;
    Recovery best;
    for (int it = 0; it < std::max(1, opt.recovery_iters); ++it)
    {
        Recovery cur;
        Allocation &a = cur.allocation;
        a.num_messages = num;
        a.n_sc = n_sc;
        a.m = ch.m;
        a.owner.assign(n_sc, 0);
        a.eta.assign(n_sc, 0.0);
        a.rate.assign(n_sc, 0.0);
        a.beam.assign(n_sc, CVec{});

        DcResiduals res;
        res.gamma.assign(num, 0.0);
        res.lambda.resize(duals.lambda.size());
        for (std::size_t i = 0; i < duals.lambda.size(); ++i)
            res.lambda[i].assign(duals.lambda[i].size(), 0.0);

        std::vector<double> served(num, 0.0);
        std::vector<double> g(num);
        bool feasible = true;
        for (std::size_t n = 0; n < n_sc; ++n)
        {
            for (std::size_t j = 0; j < num; ++j)
            {
                double lsum = 0.0;
                for (double l : duals.lambda[j * n_sc + n])
                    lsum += l;
                g[j] = g_value(duals.gamma[j], lsum, 1.0);
            }
            std::size_t j = incumbent[n];
            bool live = true;
            try
            {
                const auto choice = mu_rule(g);
                j = choice.index;
                cur.unique = cur.unique && choice.unique;
            }
            catch (const NoAssignment &)
            {
                live = false; // nothing to send here: keep the incumbent owner at zero power
            }
            a.owner[n] = j;
            a.beam[n].assign(ch.m, cplx{0.0, 0.0});
            a.beam[n][0] = 1.0;
            if (!live)
                continue;

            const auto &lam = duals.lambda[j * n_sc + n];
            double lsum = 0.0;
            for (double l : lam)
                lsum += l;
            const double c = c_rule(duals.gamma[j], lsum, 1.0, b_hz);
            const auto audience = audience_channels(ch, messages[j], n);
            const auto &w_lin = lin.at(j, n);
            CVec w;
            try
            {
                w = w_rule(lam, audience, w_lin, 1.0, c, ch.m, ch.noise_w, b_hz);
            }
            catch (const InfeasibleDirection &)
            {
                feasible = false;
                continue;
            }
            const double y = std::expm1(c / b_hz * kLn2);
            for (std::size_t k = 0; k < audience.size() && k < lam.size(); ++k)
            {
                const double scale = y + audience[k].beta * std::norm(cdot(audience[k].h, w_lin)) / m_noise;
                if (scale > 0.0)
                    res.lambda[j * n_sc + n][k] = linear_violation(audience[k], w_lin, w, y, m_noise) / scale;
            }
            const double norm = cnorm(w);
            if (c > 0.0 && norm > 0.0)
            {
                a.beam[n] = normalized(w);
                a.eta[n] = norm * norm;
                a.rate[n] = c;
                served[j] += c;
            }
        }
        double sum = 0.0;
        for (double e : a.eta)
            sum += e;
        a.total_power_w = sum / static_cast<double>(ch.m);

        double worst = 0.0;
        for (std::size_t j = 0; j < num; ++j)
        {
            res.gamma[j] = (demands[j] - served[j]) / demands[j];
            worst = std::max(worst, std::abs(res.gamma[j]));
        }
        for (const auto &v : res.lambda)
            for (double x : v)
                worst = std::max(worst, x);

        cur.ok = feasible && audit_allocation(a, ch, messages, 1e-9).ok();
        if (cur.ok && (!best.ok || a.total_power_w < best.allocation.total_power_w))
            best = cur;
        if (worst <= opt.recovery_tol && cur.ok)
            break;

        // scale each residual by its own dual's magnitude so one step size suits every constraint
        for (std::size_t j = 0; j < num; ++j)
            res.gamma[j] *= ref.gamma[j];
        for (std::size_t i = 0; i < res.lambda.size(); ++i)
        {
            double lsum = 0.0;
            for (double l : ref.lambda[i])
                lsum += l;
            for (auto &x : res.lambda[i])
                x *= lsum;
        }
        const double delta = opt.step0 / (1.0 + it / opt.step_tau);
        duals = subgrad_step(std::move(duals), res, delta);
    }
    return best;
}

} // namespace

double g_value(double gamma, double lambda_sum, double bandwidth_hz)
{
    if (gamma <= 0.0)
        return lambda_sum;
    if (lambda_sum <= 0.0)
        return -kInf;
    return gamma * std::log2(gamma / (kLn2 * lambda_sum)) - gamma * bandwidth_hz / kLn2 + lambda_sum;
}

MuChoice mu_rule(std::span<const double> g)
{
    MuChoice out;
    double best = -kInf;
    bool found = false;
    for (std::size_t j = 0; j < g.size(); ++j)
    {
        if (g[j] == -kInf)
            continue;
        if (!found || g[j] > best)
        {
            best = g[j];
            out.index = j;
            out.unique = true;
            found = true;
        }
        else if (g[j] == best)
            out.unique = false;
    }
    if (!found)
        throw NoAssignment("every message has G = -inf on this subcarrier");
    return out;
}

double c_rule(double gamma, double lambda_sum, double mu, double bandwidth_hz)
{
    if (mu <= 0.0 || gamma <= 0.0)
        return 0.0;
    if (lambda_sum <= 0.0)
        return kInf;
    return mu * bandwidth_hz * std::max(0.0, std::log2(gamma / (kLn2 * lambda_sum)));
}

CVec w_rule(std::span<const double> lambda, std::span<const AudienceChannel> audience, std::span<const cplx> w_prev,
            double mu, double c, std::size_t m, double noise_w, double bandwidth_hz)
{
    if (lambda.size() != audience.size())
        throw std::invalid_argument("one lambda per audience member expected");
    if (w_prev.size() != m)
        throw std::invalid_argument("linearisation point has the wrong length");
    CVec d(m, cplx{0.0, 0.0});
    if (mu <= 0.0)
        return d;
    for (std::size_t k = 0; k < audience.size(); ++k)
    {
        if (lambda[k] == 0.0)
            continue;
        const CVec t = axpy_outer(w_prev, audience[k].h, lambda[k] * audience[k].beta);
        for (std::size_t i = 0; i < m; ++i)
            d[i] += t[i];
    }
    if (cnorm(d) == 0.0)
        return d;

    const double m_noise = static_cast<double>(m) * noise_w;
    const double target = mu * std::expm1(c / (bandwidth_hz * mu) * kLn2);
    double alpha = 0.0;
    for (const auto &a : audience)
    {
        const cplx hl = cdot(a.h, w_prev);
        const double num = target + a.beta * std::norm(hl) / m_noise;
        if (num <= 0.0)
            continue;
        const double den = 2.0 * a.beta * (std::conj(hl) * cdot(a.h, d)).real() / m_noise;
        if (!(den > 0.0))
            throw InfeasibleDirection("stationary direction cannot meet a member's linearised constraint");
        alpha = std::max(alpha, num / den);
    }
    for (auto &x : d)
        x *= alpha;
    return d;
}

DcDuals subgrad_step(DcDuals duals, const DcResiduals &residuals, double delta)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("step size must be positive");
    if (residuals.gamma.size() != duals.gamma.size() || residuals.lambda.size() != duals.lambda.size())
        throw std::invalid_argument("residuals do not match the duals");
    for (std::size_t j = 0; j < duals.gamma.size(); ++j)
        duals.gamma[j] = std::max(0.0, duals.gamma[j] + delta * residuals.gamma[j]);
    for (std::size_t i = 0; i < duals.lambda.size(); ++i)
    {
        if (residuals.lambda[i].size() != duals.lambda[i].size())
            throw std::invalid_argument("residuals do not match the duals");
        for (std::size_t k = 0; k < duals.lambda[i].size(); ++k)
            duals.lambda[i][k] = std::max(0.0, duals.lambda[i][k] + delta * residuals.lambda[i][k]);
    }
    return duals;
}

DcState state_from_allocation(const Allocation &alloc, const ChannelState &ch, std::span<const Message> messages)
{
    if (alloc.num_messages != messages.size() || alloc.n_sc != ch.n_sc || alloc.m != ch.m)
        throw std::invalid_argument("allocation does not match the instance");
    DcState s;
    s.num_messages = alloc.num_messages;
    s.n_sc = alloc.n_sc;
    s.m = alloc.m;
    s.w.assign(s.num_messages * s.n_sc, CVec(s.m, cplx{0.0, 0.0}));
    s.mu.assign(s.num_messages * s.n_sc, 0.0);
    s.c.assign(s.num_messages * s.n_sc, 0.0);
    for (std::size_t n = 0; n < s.n_sc; ++n)
    {
        const std::size_t i = alloc.owner[n] * s.n_sc + n;
        s.mu[i] = 1.0;
        if (alloc.rate[n] > 0.0 && alloc.eta[n] > 0.0)
        {
            const double amp = std::sqrt(alloc.eta[n]);
            for (std::size_t k = 0; k < s.m; ++k)
                s.w[i][k] = amp * alloc.beam[n][k];
            s.c[i] = alloc.rate[n];
        }
    }
    s.objective_w = objective(s);
    return s;
}

DcState initial_point(const ChannelState &ch, std::span<const Message> messages, const DcOptions &opt)
{
    if (messages.empty())
        throw std::invalid_argument("no messages");
    switch (opt.start)
    {
    case DcStart::kAsymptotic:
        return state_from_allocation(solve_fixed_beams(ch, messages, BeamRule::kAsymptotic, opt.alloc), ch, messages);
    case DcStart::kBest: {
        std::optional<Allocation> best;
        std::optional<InfeasibleInstance> failure;
        for (auto rule : {BeamRule::kAsymptotic, BeamRule::kMrtPrincipal})
        {
            try
            {
                auto a = solve_fixed_beams(ch, messages, rule, opt.alloc);
                if (!best || a.total_power_w < best->total_power_w)
                    best = std::move(a);
            }
            catch (const InfeasibleInstance &e)
            {
                failure = e;
            }
        }
        if (!best)
            throw *failure;
        return state_from_allocation(*best, ch, messages);
    }
    case DcStart::kRandom: {
        SplitMix64 gen(opt.random_seed);
        BeamPlan plan;
        plan.num_messages = messages.size();
        plan.n_sc = ch.n_sc;
        plan.entries.resize(messages.size() * ch.n_sc);
        for (std::size_t j = 0; j < messages.size(); ++j)
            for (std::size_t n = 0; n < ch.n_sc; ++n)
            {
                CVec w(ch.m);
                for (auto &x : w)
                    x = complex_gaussian(gen);
                auto &entry = plan.entries[j * ch.n_sc + n];
                entry.w = normalized(w);
                try
                {
                    entry.q = quote_for(entry.w, audience_channels(ch, messages[j], n), ch.m, ch.noise_w);
                }
                catch (const InfeasibleDirection &)
                {
                    entry.q = kInf;
                }
            }
        const auto quotes = plan.quotes();
        const auto quoted =
            solve_quoted_allocation(demands_of(messages), quotes, ch.n_sc, ch.bandwidth_hz, opt.alloc);
        return state_from_allocation(assemble_theorem1(quoted, plan, ch.m, ch.bandwidth_hz), ch, messages);
    }
    }
    throw std::invalid_argument("unknown start mode");
}

ConvexApprox solve_convex_approx(const DcState &lin, const ChannelState &ch, std::span<const Message> messages)
{
    if (lin.num_messages != messages.size() || lin.n_sc != ch.n_sc || lin.m != ch.m)
        throw std::invalid_argument("linearisation point does not match the instance");
    const std::size_t n_sc = lin.n_sc;
    const double m_noise = static_cast<double>(ch.m) * ch.noise_w;
    const double root = std::sqrt(m_noise);

    ConvexApprox out;
    DcState &s = out.state;
    s.num_messages = lin.num_messages;
    s.n_sc = n_sc;
    s.m = lin.m;
    s.w.assign(lin.w.size(), CVec(s.m, cplx{0.0, 0.0}));
    s.mu = lin.mu;
    s.c.assign(lin.c.size(), 0.0);
    s.t = lin.t + 1;
    out.duals.gamma.assign(s.num_messages, 0.0);
    out.duals.lambda.assign(lin.w.size(), {});

    CVec v_prev(s.m);
    std::vector<double> y;
    for (std::size_t j = 0; j < s.num_messages; ++j)
    {
        MessageWork mw;
        for (std::size_t n = 0; n < n_sc; ++n)
        {
            const std::size_t i = j * n_sc + n;
            if (lin.mu[i] <= 0.0 || cnorm(lin.w[i]) == 0.0)
                continue;
            for (std::size_t k = 0; k < s.m; ++k)
                v_prev[k] = lin.w[i][k] / root;
            const auto audience = audience_channels(ch, messages[j], n);
            PairQp qp(audience, v_prev);
            if (qp.dead())
                continue;
            mw.subcarriers.push_back(n);
            mw.qps.push_back(std::move(qp));
            mw.hint.push_back(std::max(1e-3, std::expm1(lin.c[i] / ch.bandwidth_hz * kLn2)));
        }
        if (mw.qps.empty())
            throw InfeasibleInstance("message " + std::to_string(j) + " has no transmitting subcarrier");

        const double g = solve_message(mw, messages[j].demand_bits_per_s / ch.bandwidth_hz, y);
        out.duals.gamma[j] = ch.noise_w * g;
        for (std::size_t a = 0; a < mw.qps.size(); ++a)
        {
            const std::size_t i = j * n_sc + mw.subcarriers[a];
            const auto sol = mw.qps[a].solve(y[a]);
            const CVec v = mw.qps[a].combine(sol);
            for (std::size_t k = 0; k < s.m; ++k)
                s.w[i][k] = root * v[k];
            s.c[i] = ch.bandwidth_hz * std::log2(1.0 + y[a]);
            auto &lam = out.duals.lambda[i];
            lam.resize(sol.rho.size());
            for (std::size_t k = 0; k < sol.rho.size(); ++k)
                lam[k] = std::max(0.0, ch.noise_w * sol.rho[k]);
        }
    }
    s.objective_w = objective(s);
    return out;
}

DcResult dc_solve(const ChannelState &ch, std::span<const Message> messages, const DcOptions &opt)
{
    ch.validate();
    DcResult res;
    DcState state = initial_point(ch, messages, opt);
    DcState lin;
    bool have_duals = false;
    res.objective_history.push_back(state.objective_w);

    for (int t = 1; t <= opt.outer_max; ++t)
    {
        ConvexApprox next = solve_convex_approx(state, ch, messages);
        if (next.state.objective_w > state.objective_w)
        {
            // numerical noise at the fixed point; the previous iterate stands
            res.converged = true;
            break;
        }
        const double change = (state.objective_w - next.state.objective_w) / state.objective_w;
        lin = std::move(state);
        state = std::move(next.state);
        res.duals = std::move(next.duals);
        have_duals = true;
        res.objective_history.push_back(state.objective_w);
        res.outer_iterations = t;
        if (change < opt.tol)
        {
            res.converged = true;
            break;
        }
    }

    Allocation plain = allocation_from_state(state, ch);
    plain.converged = res.converged;
    plain.iterations = res.outer_iterations;
    res.allocation = plain;
    if (have_duals)
    {
        auto rec = recover(lin, res.duals, ch, messages, opt);
        res.unique_argmax = rec.unique;
        if (rec.ok && rec.allocation.total_power_w <= plain.total_power_w * (1.0 + 1e-9))
        {
            res.allocation = std::move(rec.allocation);
            res.recovered = true;
        }
    }
    res.allocation.converged = res.converged;
    res.allocation.unique_argmax = res.unique_argmax;
    res.allocation.iterations = res.outer_iterations;
    res.state = std::move(state);
    return res;
}

} // namespace tilecast
