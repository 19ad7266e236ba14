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

#include "tilecast/cxkernel.hpp"

#include <cmath>
#include <stdexcept>

namespace tilecast {

cplx cdot(std::span<const cplx> a, std::span<const cplx> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("cdot: length mismatch");
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::conj(a[i]) * b[i];
    return acc;
}

double cnorm(std::span<const cplx> a)
{
    double acc = 0.0;
    for (const auto &x : a)
        acc += std::norm(x);
    return std::sqrt(acc);
}

CVec axpy_outer(std::span<const cplx> w_prev, std::span<const cplx> h, double coeff)
{
    const cplx s = coeff * cdot(h, w_prev);
    CVec out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        out[i] = s * h[i];
    return out;
}

CVec normalized(std::span<const cplx> a)
{
    const double n = cnorm(a);
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::domain_error("cannot normalize a zero or non-finite vector");
    CVec out(a.begin(), a.end());
    for (auto &x : out)
        x /= n;
    return out;
}

} // namespace tilecast
