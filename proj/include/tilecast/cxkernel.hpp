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

#ifndef TILECAST_CXKERNEL_HPP
#define TILECAST_CXKERNEL_HPP

#include <complex>
#include <span>
#include <vector>

namespace tilecast {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// sum_i conj(a_i) * b_i, i.e. a^H b. Throws std::invalid_argument on length mismatch.
cplx cdot(std::span<const cplx> a, std::span<const cplx> b);

double cnorm(std::span<const cplx> a);

// coeff * (h^H w_prev) * h
CVec axpy_outer(std::span<const cplx> w_prev, std::span<const cplx> h, double coeff);

// a / ||a||; throws std::domain_error for the zero vector.
CVec normalized(std::span<const cplx> a);

} // namespace tilecast

#endif
