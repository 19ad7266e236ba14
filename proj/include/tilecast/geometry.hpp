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

#ifndef TILECAST_GEOMETRY_HPP
#define TILECAST_GEOMETRY_HPP

#include <compare>
#include <set>

namespace tilecast {

// Equirectangular U_h x U_v tiling of the sphere plus the viewport size.
// Yaw spans [0, 360) degrees left to right, pitch spans [0, 180] top to bottom.
struct TilingConfig
{
    int u_h = 30;             // tile columns
    int u_v = 15;             // tile rows
    double fov_h_deg = 100.0; // horizontal FoV extent
    double fov_v_deg = 100.0; // vertical FoV extent
    double margin_deg = 15.0; // extra angle added on all four sides

    void validate() const;
};

// 1-based (column, row) tile index.
struct TileId
{
    int col = 1;
    int row = 1;

    auto operator<=>(const TileId &) const = default;
};

using TileSet = std::set<TileId>;

struct ViewDirection
{
    double yaw_deg = 0.0;   // [0, 360)
    double pitch_deg = 90.0; // [0, 180]

    void validate() const;
};

struct Interval
{
    double lo = 0.0;
    double hi = 0.0;
};

struct AngularRect
{
    Interval yaw;
    Interval pitch;
};

// Coverage rectangle of one tile. Throws std::out_of_range for tiles outside the grid.
AngularRect tile_coverage(TileId tile, const TilingConfig &cfg);

// Tiles whose coverage has nonzero-area overlap with the margin-extended FoV centred at `dir`.
// The yaw interval wraps modulo 360, the pitch interval is clamped to [0, 180].
TileSet compute_tile_set(const ViewDirection &dir, const TilingConfig &cfg);

} // namespace tilecast

#endif
