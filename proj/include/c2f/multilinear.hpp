// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/linalg.hpp"
#include "c2f/tensor.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace c2f {

namespace detail {

inline void check_mode(Index k, Index order) {
    if (k < 0 || k >= order)
        throw std::out_of_range("mode " + std::to_string(k) + " out of range for order-" + std::to_string(order) +
                                " tensor");
}

// Sizes of the modes before and after k. In storage order a tensor is then a
// (left x I_k x right) column-major block.
inline std::pair<Index, Index> split_sizes(const Shape& dims, Index k) {
    Index left = 1, right = 1;
    for (Index n = 0; n < static_cast<Index>(dims.size()); ++n) {
        if (n < k) left *= dims[n];
        if (n > k) right *= dims[n];
    }
    return {left, right};
}

}  // namespace detail

/// Mode-k unfolding: row i_k, column sum_{n != k} i_n * prod_{m < n, m != k} I_m.
/// Modes are 0-based.
template <typename Scalar>
MatrixX<Scalar> matricize(const DenseTensor<Scalar>& t, Index k) {
    detail::check_mode(k, t.order());
    const auto [left, right] = detail::split_sizes(t.dims(), k);
    const Index ik = t.dim(k);
    MatrixX<Scalar> m(ik, left * right);
    const Scalar* src = t.data().data();
    for (Index r = 0; r < right; ++r) {
        Eigen::Map<const MatrixX<Scalar>> slab(src + r * left * ik, left, ik);
        m.middleCols(r * left, left) = slab.transpose();
    }
    return m;
}

/// Inverse of matricize.
template <typename Derived>
DenseTensor<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m, Index k, const Shape& dims) {
    using Scalar = typename Derived::Scalar;
    check_shape(dims);
    detail::check_mode(k, static_cast<Index>(dims.size()));
    const auto [left, right] = detail::split_sizes(dims, k);
    const Index ik = dims[static_cast<std::size_t>(k)];
    if (m.rows() != ik || m.cols() != left * right)
        throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                    ", expected " + std::to_string(ik) + "x" + std::to_string(left * right));
    DenseTensor<Scalar> t(dims);
    Scalar* dst = t.data().data();
    for (Index r = 0; r < right; ++r) {
        Eigen::Map<MatrixX<Scalar>> slab(dst + r * left * ik, left, ik);
        slab = m.middleCols(r * left, left).transpose();
    }
    return t;
}

/// t x_k u for u of shape R x I_k; the result has I_k replaced by R.
template <typename Scalar, typename Derived>
DenseTensor<Scalar> mode_product(const DenseTensor<Scalar>& t, const Eigen::MatrixBase<Derived>& u, Index k) {
    detail::check_mode(k, t.order());
    const Index ik = t.dim(k);
    if (u.cols() != ik)
        throw std::invalid_argument("mode_product: matrix has " + std::to_string(u.cols()) + " columns, mode " +
                                    std::to_string(k) + " has size " + std::to_string(ik));
    Shape out_dims = t.dims();
    out_dims[static_cast<std::size_t>(k)] = u.rows();
    const auto [left, right] = detail::split_sizes(t.dims(), k);
    const MatrixX<Scalar> ut = u.transpose();
    DenseTensor<Scalar> out(out_dims);
    const Scalar* src = t.data().data();
    Scalar* dst = out.data().data();
    for (Index r = 0; r < right; ++r) {
        Eigen::Map<const MatrixX<Scalar>> in(src + r * left * ik, left, ik);
        Eigen::Map<MatrixX<Scalar>> res(dst + r * left * u.rows(), left, u.rows());
        res.noalias() = in * ut;
    }
    return out;
}

template <typename Scalar>
Scalar frobenius_norm(const DenseTensor<Scalar>& t) {
    return t.data().norm();
}

/// Tucker form: core x_0 U_0 x_1 ... x_{d-1} U_{d-1}.
template <typename Scalar>
struct FactorSet {
    DenseTensor<Scalar> core;
    std::vector<MatrixX<Scalar>> factors;
};

template <typename Scalar>
DenseTensor<Scalar> tucker_product(const DenseTensor<Scalar>& core, const std::vector<MatrixX<Scalar>>& factors) {
    if (static_cast<Index>(factors.size()) != core.order())
        throw std::invalid_argument("tucker_product: need one factor per mode");
    DenseTensor<Scalar> out = core;
    for (Index k = 0; k < core.order(); ++k) out = mode_product(out, factors[static_cast<std::size_t>(k)], k);
    return out;
}

template <typename Scalar>
DenseTensor<Scalar> reconstruct(const FactorSet<Scalar>& fs) {
    return tucker_product(fs.core, fs.factors);
}

/// Truncated higher-order SVD with ranks[k] leading left singular vectors per mode.
template <typename Scalar>
FactorSet<Scalar> hosvd(const DenseTensor<Scalar>& t, const std::vector<Index>& ranks) {
    if (static_cast<Index>(ranks.size()) != t.order()) throw std::invalid_argument("hosvd: need one rank per mode");
    std::vector<MatrixX<Scalar>> factors;
    factors.reserve(ranks.size());
    for (Index k = 0; k < t.order(); ++k) {
        const Index r = ranks[static_cast<std::size_t>(k)];
        if (r < 1 || r > t.dim(k))
            throw std::out_of_range("hosvd: rank " + std::to_string(r) + " out of range for mode " +
                                    std::to_string(k) + " of size " + std::to_string(t.dim(k)));
        const auto dec = svd(matricize(t, k));
        MatrixX<Scalar> u = MatrixX<Scalar>::Zero(t.dim(k), r);
        // the thin SVD has only min(I_k, rest) columns; complete the basis if more are requested
        const Index have = std::min(r, dec.u.cols());
        u.leftCols(have) = dec.u.leftCols(have);
        if (have < r) {
            Eigen::HouseholderQR<MatrixX<Scalar>> qr(dec.u);
            MatrixX<Scalar> q = qr.householderQ() * MatrixX<Scalar>::Identity(t.dim(k), t.dim(k));
            u.rightCols(r - have) = q.middleCols(have, r - have);
        }
        factors.push_back(std::move(u));
    }
    DenseTensor<Scalar> core = t;
    for (Index k = 0; k < t.order(); ++k) core = mode_product(core, factors[static_cast<std::size_t>(k)].transpose(), k);
    return {std::move(core), std::move(factors)};
}

}  // namespace c2f
