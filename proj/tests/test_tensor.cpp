// SPDX-License-Identifier: MIT
#include "c2f/multilinear.hpp"
#include "c2f/observation_mask.hpp"
#include "c2f/tensor.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace c2f {
namespace {

using test::random_shape;
using test::random_tensor;

// Mode-k unfolding index law evaluated literally with 1-based indices.
Matrix matricize_oracle(const Tensor& t, Index k) {
    const Shape& dims = t.dims();
    const Index d = t.order();
    Index cols = 1;
    for (Index n = 0; n < d; ++n)
        if (n != k) cols *= dims[n];
    Matrix m = Matrix::Constant(dims[k], cols, std::nan(""));
    std::vector<Index> idx(d, 1);
    for (Index lin = 0; lin < t.size(); ++lin) {
        Index j = 1;
        for (Index n = 1; n <= d; ++n) {
            if (n - 1 == k) continue;
            Index jn = 1;
            for (Index mm = 1; mm <= n - 1; ++mm)
                if (mm - 1 != k) jn *= dims[mm - 1];
            j += (idx[n - 1] - 1) * jn;
        }
        std::vector<Index> zero_based(idx.begin(), idx.end());
        for (auto& v : zero_based) --v;
        m(idx[k] - 1, j - 1) = t(std::span<const Index>(zero_based));
        for (Index n = 0; n < d; ++n) {
            if (++idx[n] <= dims[n]) break;
            idx[n] = 1;
        }
    }
    return m;
}

TEST(DenseTensor, RejectsEmptyAndZeroDims) {
    EXPECT_THROW(Tensor(Shape{}), std::invalid_argument);
    EXPECT_THROW(Tensor(Shape{2, 0, 3}), std::invalid_argument);
    EXPECT_THROW(Tensor(Shape{2, 2}, Vector::Zero(3)), std::invalid_argument);
    EXPECT_NO_THROW(Tensor(Shape{1, 1, 1}));
}

TEST(DenseTensor, LinearOrderIsFirstIndexFastest) {
    Tensor t({2, 3});
    t(1, 0) = 5;
    t(0, 1) = 7;
    EXPECT_EQ(t.data()[1], 5);
    EXPECT_EQ(t.data()[2], 7);
    EXPECT_THROW(t(2, 0), std::out_of_range);
}

TEST(Matricize, MatrixModeOneIsTranspose) {
    Tensor t({2, 2});
    t(0, 0) = 1;
    t(0, 1) = 2;
    t(1, 0) = 3;
    t(1, 1) = 4;
    Matrix expected(2, 2);
    expected << 1, 3, 2, 4;
    EXPECT_EQ(matricize(t, 1), expected);
}

TEST(Matricize, IndexFormulaOn2x3x2) {
    Tensor t({2, 3, 2});
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 3; ++j)
            for (Index k = 0; k < 2; ++k) t(i, j, k) = 100.0 * (i + 1) + 10.0 * (j + 1) + (k + 1);
    const Matrix m = matricize(t, 0);
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 6);
    // j = 1 + (i2 - 1) + (i3 - 1) * 3
    for (Index i1 = 1; i1 <= 2; ++i1)
        for (Index i2 = 1; i2 <= 3; ++i2)
            for (Index i3 = 1; i3 <= 2; ++i3) EXPECT_EQ(m(i1 - 1, (i2 - 1) + (i3 - 1) * 3), 100.0 * i1 + 10.0 * i2 + i3);
    EXPECT_EQ(m, matricize_oracle(t, 0));
}

TEST(Matricize, IndexLawAndRoundTripOnRandomTensors) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const Shape dims = random_shape(rng, 1, 4, 4);
        const Tensor t = random_tensor(dims, rng);
        for (Index k = 0; k < t.order(); ++k) {
            const Matrix m = matricize(t, k);
            ASSERT_EQ(m, matricize_oracle(t, k)) << shape_string(dims) << " mode " << k;
            ASSERT_EQ(fold(m, k, dims), t);
        }
    }
}

TEST(Matricize, ModeOutOfRange) {
    Tensor t({2, 2});
    EXPECT_THROW(matricize(t, 2), std::out_of_range);
    EXPECT_THROW(matricize(t, -1), std::out_of_range);
}

TEST(Fold, ShapeChecksAndTrivialCases) {
    EXPECT_THROW(fold(Matrix::Zero(2, 4), 0, {2, 3}), std::invalid_argument);
    EXPECT_EQ(fold(Matrix::Zero(3, 4), 1, {2, 3, 2}), Tensor({2, 3, 2}));
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    const Tensor t = fold(m, 0, {2, 3});
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 3; ++j) EXPECT_EQ(t(i, j), m(i, j));
}

// Direct evaluation of the mode-k product sum.
Tensor mode_product_oracle(const Tensor& t, const Matrix& u, Index k) {
    Shape out_dims = t.dims();
    out_dims[k] = u.rows();
    Tensor out(out_dims);
    std::vector<Index> idx(out_dims.size(), 0);
    for (Index lin = 0; lin < out.size(); ++lin) {
        long double acc = 0;
        std::vector<Index> src = idx;
        for (Index i = 0; i < t.dim(k); ++i) {
            src[k] = i;
            acc += static_cast<long double>(u(idx[k], i)) * t(std::span<const Index>(src));
        }
        out(std::span<const Index>(idx)) = static_cast<double>(acc);
        for (std::size_t n = 0; n < idx.size(); ++n) {
            if (++idx[n] < out_dims[n]) break;
            idx[n] = 0;
        }
    }
    return out;
}

TEST(ModeProduct, MatchesNestedLoopOracle) {
    std::mt19937_64 rng(11);
    const Tensor t = random_tensor({3, 4, 2}, rng);
    const Matrix u = test::random_matrix(5, 4, rng);
    const Tensor got = mode_product(t, u, 1);
    const Tensor want = mode_product_oracle(t, u, 1);
    ASSERT_EQ(got.dims(), (Shape{3, 5, 2}));
    EXPECT_LE((got.data() - want.data()).cwiseAbs().maxCoeff(), 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
        const Shape dims = random_shape(rng, 1, 4, 4);
        const Tensor x = random_tensor(dims, rng);
        for (Index k = 0; k < x.order(); ++k) {
            const Matrix v = test::random_matrix(1 + trial % 4, dims[k], rng);
            EXPECT_LE((mode_product(x, v, k).data() - mode_product_oracle(x, v, k).data()).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(ModeProduct, IdentityCompositionAndLinearity) {
    std::mt19937_64 rng(3);
    const Tensor t = random_tensor({3, 4, 2, 2}, rng);
    for (Index k = 0; k < t.order(); ++k) EXPECT_EQ(mode_product(t, Matrix::Identity(t.dim(k), t.dim(k)), k), t);

    const Matrix u = test::random_matrix(5, 4, rng), v = test::random_matrix(2, 5, rng);
    const Tensor lhs = mode_product(mode_product(t, u, 1), v, 1);
    const Tensor rhs = mode_product(t, Matrix(v * u), 1);
    EXPECT_LE((lhs.data() - rhs.data()).cwiseAbs().maxCoeff(), 1e-12);

    const Tensor s = random_tensor(t.dims(), rng);
    const Matrix w = test::random_matrix(5, 4, rng);
    const double a = 0.7, b = -1.3;
    const Tensor lin1 = mode_product(Tensor(a * t + b * s), u, 1);
    const Tensor lin2 = a * mode_product(t, u, 1) + b * mode_product(s, u, 1);
    EXPECT_LE((lin1.data() - lin2.data()).cwiseAbs().maxCoeff(), 1e-12);
    const Tensor lin3 = mode_product(t, Matrix(a * u + b * w), 1);
    const Tensor lin4 = a * mode_product(t, u, 1) + b * mode_product(t, w, 1);
    EXPECT_LE((lin3.data() - lin4.data()).cwiseAbs().maxCoeff(), 1e-12);

    EXPECT_THROW(mode_product(t, Matrix::Identity(3, 3), 1), std::invalid_argument);
}

TEST(ModeProduct, BoundedBySpectralNorm) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Shape dims = random_shape(rng, 2, 4, 5);
        const Tensor t = random_tensor(dims, rng);
        const Index k = static_cast<Index>(trial % dims.size());
        const Matrix u = test::random_matrix(3, dims[k], rng);
        const double spectral = Eigen::JacobiSVD<Matrix>(u).singularValues()[0];
        EXPECT_LE(frobenius_norm(mode_product(t, u, k)), spectral * frobenius_norm(t) * (1 + 1e-12));
    }
}

TEST(FrobeniusNorm, ClosedFormsAndCompensatedSum) {
    EXPECT_DOUBLE_EQ(frobenius_norm(Tensor::constant({2, 2, 2}, 1.0)), std::sqrt(8.0));
    EXPECT_EQ(frobenius_norm(Tensor({3, 3})), 0.0);
    std::mt19937_64 rng(9);
    const Tensor t = random_tensor({7, 5, 3}, rng);
    // Kahan-compensated sum of squares in long double
    long double sum = 0, comp = 0;
    for (Index i = 0; i < t.size(); ++i) {
        const long double y = static_cast<long double>(t.data()[i]) * t.data()[i] - comp;
        const long double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    const double n = frobenius_norm(t);
    EXPECT_NEAR(n * n, static_cast<double>(sum), 1e-12 * static_cast<double>(sum));
}

TEST(Hosvd, FullRankIsExact) {
    std::mt19937_64 rng(13);
    const Tensor t = random_tensor({4, 5, 3}, rng);
    const auto fs = hosvd(t, {4, 5, 3});
    for (const auto& u : fs.factors)
        EXPECT_LE((u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(frobenius_norm(Tensor(reconstruct(fs) - t)), 1e-8 * frobenius_norm(t));
}

TEST(Hosvd, RankOneOuterProduct) {
    Tensor t({3, 4, 2});
    const Vector a = Vector::LinSpaced(3, 1, 3), b = Vector::LinSpaced(4, -1, 2), c = Vector::LinSpaced(2, 0.5, 1.5);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j)
            for (Index k = 0; k < 2; ++k) t(i, j, k) = a[i] * b[j] * c[k];
    const auto fs = hosvd(t, {1, 1, 1});
    EXPECT_EQ(fs.core.dims(), (Shape{1, 1, 1}));
    EXPECT_LE(frobenius_norm(Tensor(reconstruct(fs) - t)), 1e-8 * frobenius_norm(t));
}

TEST(Hosvd, TruncationErrorBoundedByDiscardedSpectra) {
    std::mt19937_64 rng(17);
    const Tensor t = random_tensor({8, 8, 3}, rng);
    const std::vector<Index> ranks = {4, 4, 2};
    const auto fs = hosvd(t, ranks);
    double bound_sq = 0;
    for (Index k = 0; k < 3; ++k) {
        const Vector s = Eigen::JacobiSVD<Matrix>(matricize(t, k)).singularValues();
        bound_sq += s.tail(s.size() - ranks[k]).squaredNorm();
    }
    const double err = frobenius_norm(Tensor(reconstruct(fs) - t));
    EXPECT_GT(err, 0);
    EXPECT_LE(err, std::sqrt(bound_sq) * (1 + 1e-12));
}

TEST(Hosvd, RankOutOfRange) {
    const Tensor t({3, 3});
    EXPECT_THROW(hosvd(t, {0, 1}), std::out_of_range);
    EXPECT_THROW(hosvd(t, {4, 1}), std::out_of_range);
}

TEST(ObservationMask, IndicesAndCounts) {
    const auto m = ObservationMask::from_indices({2, 3}, {{0, 0}, {1, 2}});
    EXPECT_EQ(m.count(), 2);
    EXPECT_TRUE(m.observed(0));
    EXPECT_TRUE(m.observed(5));
    EXPECT_EQ(m.linear_indices(), (std::vector<Index>{0, 5}));
    EXPECT_EQ(m.indicator().data().sum(), 2.0);
    EXPECT_THROW(ObservationMask::from_indices({2, 3}, {{0, 0}, {0, 0}}), std::invalid_argument);
    EXPECT_THROW(ObservationMask::from_indices({2, 3}, {{2, 0}}), std::out_of_range);
}

}  // namespace
}  // namespace c2f
