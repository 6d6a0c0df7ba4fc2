// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/observation_mask.hpp"
#include "c2f/tensor.hpp"

#include <utility>
#include <vector>

namespace c2f {

/// Axis-aligned rectangle over the two spatial modes (0 = rows, 1 = columns).
struct Region {
    Index row = 0, col = 0, rows = 0, cols = 0;

    bool contains(Index r, Index c) const { return r >= row && r < row + rows && c >= col && c < col + cols; }
    bool contains(const Region& o) const {
        return o.row >= row && o.col >= col && o.row + o.rows <= row + rows && o.col + o.cols <= col + cols;
    }
    friend bool operator==(const Region&, const Region&) = default;
};

/// Partition of the spatial extent into 2^stage x 2^stage cores. Patch k is
/// core k grown by `overlap` pixels on every side facing a neighbour. Patches
/// are numbered row-major over the grid.
struct PatchGrid {
    int stage = 0;
    Index side = 1;  // 2^stage
    Index overlap = 0;
    Shape dims;
    std::vector<Region> cores;
    std::vector<Region> patches;

    Index count() const { return static_cast<Index>(cores.size()); }
    /// Shape of patch k including every non-spatial mode.
    Shape patch_dims(Index k) const;
};

/// Near-equal splits with the remainder spread over the trailing rows and
/// columns of the grid. The overlap is clamped to half the smallest core side.
/// Throws std::invalid_argument when 2^stage exceeds either spatial size.
PatchGrid make_grid(const Shape& dims, int stage, Index overlap);

struct PatchSet {
    PatchGrid grid;
    std::vector<Tensor> patches;
};

Tensor extract_region(const Tensor& t, const Region& r);
ObservationMask extract_region(const ObservationMask& m, const Region& r);

PatchSet extract(const Tensor& t, const PatchGrid& grid);
std::vector<ObservationMask> extract(const ObservationMask& m, const PatchGrid& grid);

/// Writes accepted patches over `base`. Pixels covered by several accepted
/// patches get their mean; pixels covered by none keep `base`.
Tensor merge(const Tensor& base, const std::vector<std::pair<Index, Tensor>>& accepted, const PatchGrid& grid);

}  // namespace c2f
