// SPDX-License-Identifier: MIT
#include "c2f/patch_grid.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace c2f {
namespace {

// Per-pixel accumulate-and-divide over accepted patches.
Tensor merge_oracle(const Tensor& base, const std::vector<std::pair<Index, Tensor>>& accepted, const PatchGrid& grid) {
    const Index h = base.dim(0), w = base.dim(1), ch = base.dim(2);
    Tensor out = base;
    for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j)
            for (Index c = 0; c < ch; ++c) {
                double sum = 0;
                int n = 0;
                for (const auto& [k, p] : accepted) {
                    const Region& r = grid.patches[static_cast<std::size_t>(k)];
                    if (!r.contains(i, j)) continue;
                    sum += p(i - r.row, j - r.col, c);
                    ++n;
                }
                if (n) out(i, j, c) = sum / n;
            }
    return out;
}

TEST(MakeGrid, StageOneWithoutOverlap) {
    const auto g = make_grid({256, 256, 3}, 1, 0);
    ASSERT_EQ(g.count(), 4);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(g.cores[k].rows, 128);
        EXPECT_EQ(g.cores[k].cols, 128);
        EXPECT_EQ(g.patches[k], g.cores[k]);
    }
    EXPECT_EQ(g.cores[1], (Region{0, 128, 128, 128}));
    EXPECT_EQ(g.cores[2], (Region{128, 0, 128, 128}));
}

TEST(MakeGrid, OverlapExpandsInternalSidesOnly) {
    const auto g = make_grid({256, 256, 3}, 1, 8);
    EXPECT_EQ(g.patches[0], (Region{0, 0, 136, 136}));
    EXPECT_EQ(g.patches[3], (Region{120, 120, 136, 136}));
    EXPECT_EQ(g.patch_dims(0), (Shape{136, 136, 3}));

    const auto g2 = make_grid({256, 256, 3}, 2, 8);
    EXPECT_EQ(g2.patches[5], (Region{56, 56, 80, 80}));
}

TEST(MakeGrid, FinestStageHas64Cores) {
    const auto g = make_grid({256, 256, 3}, 3, 8);
    ASSERT_EQ(g.count(), 64);
    for (const auto& c : g.cores) {
        EXPECT_EQ(c.rows, 32);
        EXPECT_EQ(c.cols, 32);
    }
}

TEST(MakeGrid, RemainderGoesToTrailingRegionsAndOverlapIsClamped) {
    const auto g = make_grid({10, 7, 1}, 2, 100);
    // 10 = 2 + 2 + 3 + 3, 7 = 1 + 2 + 2 + 2
    EXPECT_EQ(g.cores[0], (Region{0, 0, 2, 1}));
    EXPECT_EQ(g.cores[15], (Region{7, 5, 3, 2}));
    EXPECT_EQ(g.overlap, 0);
    EXPECT_EQ(make_grid({64, 64, 3}, 2, 100).overlap, 8);
    EXPECT_THROW(make_grid({7, 64, 3}, 3, 0), std::invalid_argument);
    EXPECT_THROW(make_grid({64, 64, 3}, 1, -1), std::invalid_argument);
    EXPECT_EQ(make_grid({5, 5, 3}, 0, 4).patches[0], (Region{0, 0, 5, 5}));
}

TEST(MakeGrid, PartitionCompletenessOnRandomShapes) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<Index> side(8, 70), ov(0, 9);
    std::uniform_int_distribution<int> st(0, 3);
    for (int trial = 0; trial < 40; ++trial) {
        const Shape dims = {side(rng), side(rng), 3};
        const auto g = make_grid(dims, st(rng), ov(rng));
        ASSERT_EQ(g.count(), g.side * g.side);
        for (std::size_t k = 0; k < g.cores.size(); ++k) EXPECT_TRUE(g.patches[k].contains(g.cores[k]));
        for (Index i = 0; i < dims[0]; ++i)
            for (Index j = 0; j < dims[1]; ++j) {
                int in_core = 0, in_patch = 0;
                for (std::size_t k = 0; k < g.cores.size(); ++k) {
                    in_core += g.cores[k].contains(i, j);
                    in_patch += g.patches[k].contains(i, j);
                }
                ASSERT_EQ(in_core, 1);
                ASSERT_GE(in_patch, 1);
            }
    }
}

TEST(Extract, ConstantAndOverlapStrips) {
    const auto g = make_grid({32, 32, 3}, 1, 4);
    for (const auto& p : extract(Tensor::constant({32, 32, 3}, 0.25), g).patches)
        EXPECT_TRUE((p.data().array() == 0.25).all());

    std::mt19937_64 rng(13);
    const Tensor t = test::random_tensor({32, 32, 3}, rng);
    const auto set = extract(t, g);
    for (Index i = 0; i < 32; ++i)
        for (Index j = 0; j < 32; ++j) {
            int covering = 0;
            for (Index k = 0; k < g.count(); ++k) {
                const Region& r = g.patches[static_cast<std::size_t>(k)];
                if (!r.contains(i, j)) continue;
                ++covering;
                for (Index c = 0; c < 3; ++c) ASSERT_EQ(set.patches[static_cast<std::size_t>(k)](i - r.row, j - r.col, c), t(i, j, c));
            }
            const bool row_strip = i >= 12 && i < 20, col_strip = j >= 12 && j < 20;
            EXPECT_EQ(covering, (row_strip ? 2 : 1) * (col_strip ? 2 : 1));
        }
    EXPECT_THROW(extract(Tensor({31, 32, 3}), g), std::invalid_argument);
}

TEST(Extract, MaskRestrictionMatchesTensorRestriction) {
    std::mt19937_64 rng(14);
    const auto m = test::bernoulli_mask({20, 18, 3}, 0.3, rng);
    const auto g = make_grid(m.dims(), 2, 3);
    const auto masks = extract(m, g);
    const auto ind = extract(m.indicator(), g);
    for (std::size_t k = 0; k < masks.size(); ++k) EXPECT_EQ(masks[k].indicator(), ind.patches[k]);
}

TEST(Merge, DisjointTilingRoundTrip) {
    std::mt19937_64 rng(15);
    const Tensor t = test::random_tensor({24, 20, 3}, rng);
    const auto g = make_grid(t.dims(), 2, 0);
    const auto set = extract(t, g);
    std::vector<std::pair<Index, Tensor>> all;
    for (Index k = 0; k < g.count(); ++k) all.emplace_back(k, set.patches[static_cast<std::size_t>(k)]);
    EXPECT_EQ(merge(Tensor(t.dims()), all, g), t);
    EXPECT_EQ(merge(t, {}, g), t);
}

TEST(Merge, AdjacentConstantPatchesAverageInTheStrip) {
    const Tensor base = Tensor::constant({16, 16, 2}, -1.0);
    const auto g = make_grid(base.dims(), 1, 2);
    const double a = 0.3, b = 0.8;
    const std::vector<std::pair<Index, Tensor>> acc = {{0, Tensor::constant(g.patch_dims(0), a)},
                                                       {1, Tensor::constant(g.patch_dims(1), b)}};
    const Tensor out = merge(base, acc, g);
    EXPECT_EQ(out, merge_oracle(base, acc, g));
    EXPECT_EQ(out(0, 0, 0), a);
    EXPECT_EQ(out(0, 15, 1), b);
    EXPECT_EQ(out(3, 7, 0), (a + b) / 2);
    EXPECT_EQ(out(3, 8, 0), (a + b) / 2);
    EXPECT_EQ(out(3, 5, 0), a);
    EXPECT_EQ(out(12, 3, 0), -1.0);
}

TEST(Merge, MatchesOracleOnRandomSubsets) {
    std::mt19937_64 rng(16);
    std::bernoulli_distribution pick(0.5);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor base = test::random_tensor({30, 26, 3}, rng);
        const auto g = make_grid(base.dims(), 1 + trial % 3, 1 + trial % 5);
        std::vector<std::pair<Index, Tensor>> acc;
        for (Index k = 0; k < g.count(); ++k)
            if (pick(rng)) acc.emplace_back(k, test::random_tensor(g.patch_dims(k), rng));
        const Tensor got = merge(base, acc, g), want = merge_oracle(base, acc, g);
        EXPECT_LE((got.data() - want.data()).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_EQ(merge(base, acc, g), got);  // idempotent for a fixed accepted set
    }
}

TEST(Merge, ConservationIsExact) {
    std::mt19937_64 rng(17);
    for (int stage = 1; stage <= 3; ++stage) {
        const Tensor base = test::random_tensor({40, 36, 3}, rng);
        const auto g = make_grid(base.dims(), stage, 3);
        const auto set = extract(base, g);
        std::vector<std::pair<Index, Tensor>> acc;
        for (Index k = 0; k < g.count(); ++k) acc.emplace_back(k, set.patches[static_cast<std::size_t>(k)]);
        EXPECT_EQ(merge(base, acc, g), base);
    }
}

TEST(Merge, Errors) {
    const Tensor base({16, 16, 3});
    const auto g = make_grid(base.dims(), 1, 2);
    EXPECT_THROW(merge(base, {{0, Tensor(g.patch_dims(0))}, {0, Tensor(g.patch_dims(0))}}, g), std::invalid_argument);
    EXPECT_THROW(merge(base, {{0, Tensor({3, 3, 3})}}, g), std::invalid_argument);
    EXPECT_THROW(merge(base, {{4, Tensor(g.patch_dims(0))}}, g), std::out_of_range);
    EXPECT_THROW(merge(Tensor({15, 16, 3}), {}, g), std::invalid_argument);
}

}  // namespace
}  // namespace c2f
