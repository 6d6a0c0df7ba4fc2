// SPDX-License-Identifier: MIT
#include "c2f/patch_grid.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace c2f {

namespace {

// Start offsets and lengths of `parts` near-equal pieces of [0, n).
std::vector<std::pair<Index, Index>> split(Index n, Index parts) {
    const Index base = n / parts, extra = n % parts;
    std::vector<std::pair<Index, Index>> out;
    Index at = 0;
    for (Index p = 0; p < parts; ++p) {
        const Index len = base + (p >= parts - extra ? 1 : 0);
        out.emplace_back(at, len);
        at += len;
    }
    return out;
}

void check_spatial(const Shape& dims) {
    if (dims.size() < 2) throw std::invalid_argument("patch operations need at least two spatial modes");
}

Index trailing_size(const Shape& dims) {
    Index n = 1;
    for (std::size_t k = 2; k < dims.size(); ++k) n *= dims[k];
    return n;
}

void check_region(const Shape& dims, const Region& r) {
    if (r.row < 0 || r.col < 0 || r.rows <= 0 || r.cols <= 0 || r.row + r.rows > dims[0] || r.col + r.cols > dims[1])
        throw std::out_of_range("region outside the spatial extent");
}

}  // namespace

Shape PatchGrid::patch_dims(Index k) const {
    Shape out = dims;
    const auto& p = patches.at(static_cast<std::size_t>(k));
    out[0] = p.rows;
    out[1] = p.cols;
    return out;
}

PatchGrid make_grid(const Shape& dims, int stage, Index overlap) {
    check_shape(dims);
    check_spatial(dims);
    if (stage < 0 || stage > 30) throw std::invalid_argument("grid stage out of range");
    if (overlap < 0) throw std::invalid_argument("overlap must be nonnegative");
    const Index side = Index{1} << stage;
    if (dims[0] < side || dims[1] < side)
        throw std::invalid_argument("a " + std::to_string(side) + "x" + std::to_string(side) +
                                    " grid is finer than the image " + shape_string(dims));
    PatchGrid g;
    g.stage = stage;
    g.side = side;
    g.dims = dims;
    g.overlap = std::min({overlap, (dims[0] / side) / 2, (dims[1] / side) / 2});
    const auto rows = split(dims[0], side), cols = split(dims[1], side);
    for (Index gr = 0; gr < side; ++gr) {
        for (Index gc = 0; gc < side; ++gc) {
            const auto [r0, rn] = rows[static_cast<std::size_t>(gr)];
            const auto [c0, cn] = cols[static_cast<std::size_t>(gc)];
            const Region core{r0, c0, rn, cn};
            const Index top = std::max<Index>(0, r0 - g.overlap), left = std::max<Index>(0, c0 - g.overlap);
            const Index bottom = std::min(dims[0], r0 + rn + g.overlap), right = std::min(dims[1], c0 + cn + g.overlap);
            g.cores.push_back(core);
            g.patches.push_back({top, left, bottom - top, right - left});
        }
    }
    return g;
}

Tensor extract_region(const Tensor& t, const Region& r) {
    check_spatial(t.dims());
    check_region(t.dims(), r);
    Shape out_dims = t.dims();
    out_dims[0] = r.rows;
    out_dims[1] = r.cols;
    Tensor out(out_dims);
    const Index h = t.dim(0), w = t.dim(1), rest = trailing_size(t.dims());
    for (Index s = 0; s < rest; ++s)
        for (Index c = 0; c < r.cols; ++c)
            out.data().segment((s * r.cols + c) * r.rows, r.rows) =
                t.data().segment((s * w + r.col + c) * h + r.row, r.rows);
    return out;
}

ObservationMask extract_region(const ObservationMask& m, const Region& r) {
    const Shape& dims = m.dims();
    check_spatial(dims);
    check_region(dims, r);
    Shape out_dims = dims;
    out_dims[0] = r.rows;
    out_dims[1] = r.cols;
    const Index h = dims[0], w = dims[1], rest = trailing_size(dims);
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(shape_size(out_dims)));
    const auto src = m.flags();
    for (Index s = 0; s < rest; ++s)
        for (Index c = 0; c < r.cols; ++c)
            for (Index i = 0; i < r.rows; ++i)
                flags[static_cast<std::size_t>((s * r.cols + c) * r.rows + i)] =
                    src[static_cast<std::size_t>((s * w + r.col + c) * h + r.row + i)];
    return ObservationMask(std::move(out_dims), std::move(flags));
}

PatchSet extract(const Tensor& t, const PatchGrid& grid) {
    if (t.dims() != grid.dims)
        throw std::invalid_argument("tensor shape " + shape_string(t.dims()) + " does not match grid " +
                                    shape_string(grid.dims));
    PatchSet set{grid, {}};
    set.patches.reserve(grid.patches.size());
    for (const auto& r : grid.patches) set.patches.push_back(extract_region(t, r));
    return set;
}

std::vector<ObservationMask> extract(const ObservationMask& m, const PatchGrid& grid) {
    if (m.dims() != grid.dims) throw std::invalid_argument("mask shape does not match grid");
    std::vector<ObservationMask> out;
    out.reserve(grid.patches.size());
    for (const auto& r : grid.patches) out.push_back(extract_region(m, r));
    return out;
}

Tensor merge(const Tensor& base, const std::vector<std::pair<Index, Tensor>>& accepted, const PatchGrid& grid) {
    if (base.dims() != grid.dims) throw std::invalid_argument("base shape does not match grid");
    if (accepted.empty()) return base;
    const Index h = base.dim(0), w = base.dim(1), rest = trailing_size(base.dims());
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(grid.count()), 0);
    Vector sum = Vector::Zero(base.size());
    // lo/hi detect entries where every covering patch agrees, which are copied
    // verbatim so that averaging never perturbs them by rounding
    Vector lo = Vector::Constant(base.size(), std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    Eigen::VectorXi hits = Eigen::VectorXi::Zero(h * w);
    for (const auto& [k, patch] : accepted) {
        if (k < 0 || k >= grid.count()) throw std::out_of_range("accepted patch index out of range");
        if (seen[static_cast<std::size_t>(k)]++) throw std::invalid_argument("duplicate accepted patch index");
        if (patch.dims() != grid.patch_dims(k))
            throw std::invalid_argument("patch " + std::to_string(k) + " has shape " + shape_string(patch.dims()) +
                                        ", region needs " + shape_string(grid.patch_dims(k)));
        const Region& r = grid.patches[static_cast<std::size_t>(k)];
        for (Index c = 0; c < r.cols; ++c) hits.segment((r.col + c) * h + r.row, r.rows).array() += 1;
        for (Index s = 0; s < rest; ++s)
            for (Index c = 0; c < r.cols; ++c) {
                const Index at = (s * w + r.col + c) * h + r.row;
                const auto src = patch.data().segment((s * r.cols + c) * r.rows, r.rows);
                sum.segment(at, r.rows) += src;
                lo.segment(at, r.rows) = lo.segment(at, r.rows).cwiseMin(src);
                hi.segment(at, r.rows) = hi.segment(at, r.rows).cwiseMax(src);
            }
    }
    Tensor out = base;
    for (Index s = 0; s < rest; ++s)
        for (Index p = 0; p < h * w; ++p)
            if (const Index at = s * h * w + p; hits[p])
                out.data()[at] = lo[at] == hi[at] ? lo[at] : sum[at] / hits[p];
    return out;
}

}  // namespace c2f
