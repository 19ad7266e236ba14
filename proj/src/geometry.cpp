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

#include "tilecast/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tilecast {

void TilingConfig::validate() const
{
    if (u_h < 1 || u_v < 1)
        throw std::invalid_argument("tiling needs at least one tile column and row");
    if (!(fov_h_deg > 0.0 && fov_h_deg <= 360.0))
        throw std::invalid_argument("fov_h_deg must lie in (0, 360]");
    if (!(fov_v_deg > 0.0 && fov_v_deg <= 180.0))
        throw std::invalid_argument("fov_v_deg must lie in (0, 180]");
    if (!(margin_deg >= 0.0) || !std::isfinite(margin_deg))
        throw std::invalid_argument("margin_deg must be a finite non-negative angle");
}

void ViewDirection::validate() const
{
    if (!(yaw_deg >= 0.0 && yaw_deg < 360.0))
        throw std::invalid_argument("yaw_deg must lie in [0, 360)");
    if (!(pitch_deg >= 0.0 && pitch_deg <= 180.0))
        throw std::invalid_argument("pitch_deg must lie in [0, 180]");
}

AngularRect tile_coverage(TileId tile, const TilingConfig &cfg)
{
    if (tile.col < 1 || tile.col > cfg.u_h || tile.row < 1 || tile.row > cfg.u_v)
        throw std::out_of_range("tile (" + std::to_string(tile.col) + "," + std::to_string(tile.row) +
                                ") outside the " + std::to_string(cfg.u_h) + "x" + std::to_string(cfg.u_v) + " grid");

    const double w = 360.0 / cfg.u_h;
    const double h = 180.0 / cfg.u_v;
    return {{(tile.col - 1) * w, tile.col * w}, {(tile.row - 1) * h, tile.row * h}};
}

namespace {

// Open-interval overlap: touching at a single point does not count.
bool overlaps(Interval a, Interval b)
{
    return std::max(a.lo, b.lo) < std::min(a.hi, b.hi);
}

} // namespace

TileSet compute_tile_set(const ViewDirection &dir, const TilingConfig &cfg)
{
    cfg.validate();
    dir.validate();

    const double half_h = 0.5 * cfg.fov_h_deg + cfg.margin_deg;
    const double half_v = 0.5 * cfg.fov_v_deg + cfg.margin_deg;

    const bool all_columns = 2.0 * half_h >= 360.0;
    const Interval yaw{dir.yaw_deg - half_h, dir.yaw_deg + half_h};
    const Interval pitch{std::max(0.0, dir.pitch_deg - half_v), std::min(180.0, dir.pitch_deg + half_v)};

    TileSet tiles;
    for (int col = 1; col <= cfg.u_h; ++col)
    {
        const Interval cyaw = tile_coverage({col, 1}, cfg).yaw;
        // yaw lies within (-360, 720), so three images of the tile cover every wrap
        const bool hit = all_columns || overlaps(yaw, {cyaw.lo - 360.0, cyaw.hi - 360.0}) || overlaps(yaw, cyaw) ||
                         overlaps(yaw, {cyaw.lo + 360.0, cyaw.hi + 360.0});
        if (!hit)
            continue;
        for (int row = 1; row <= cfg.u_v; ++row)
            if (overlaps(pitch, tile_coverage({col, row}, cfg).pitch))
                tiles.insert({col, row});
    }
    return tiles;
}

} // namespace tilecast
