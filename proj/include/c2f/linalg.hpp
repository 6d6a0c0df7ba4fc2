// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/tensor.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace c2f {

template <typename Scalar>
struct SvdResult {
    MatrixX<Scalar> u;
    VectorX<Scalar> sigma;  // nonincreasing
    MatrixX<Scalar> v;
};

/// Thin SVD, m = u * diag(sigma) * v^T.
///
/// Sign convention: the largest-magnitude entry of every left singular vector
/// is nonnegative (ties go to the lowest row), and the matching right vector
/// is flipped with it.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    if (!m.allFinite()) throw std::domain_error("svd: non-finite input");
    Eigen::BDCSVD<MatrixX<Scalar>> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult<Scalar> out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
    for (Index c = 0; c < out.u.cols(); ++c) {
        Index arg = 0;
        out.u.col(c).cwiseAbs().maxCoeff(&arg);
        if (out.u(arg, c) < Scalar(0)) {
            out.u.col(c) = -out.u.col(c);
            out.v.col(c) = -out.v.col(c);
        }
    }
    return out;
}

/// Singular value thresholding: the proximal map of tau * ||.||_*.
///
/// `shrunk_sigma`, when given, receives max(sigma - tau, 0).
template <typename Derived>
MatrixX<typename Derived::Scalar> svt(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar tau,
                                      VectorX<typename Derived::Scalar>* shrunk_sigma = nullptr) {
    using Scalar = typename Derived::Scalar;
    if (!(tau >= Scalar(0))) throw std::invalid_argument("svt: tau must be nonnegative");
    const auto dec = svd(m);
    VectorX<Scalar> s = (dec.sigma.array() - tau).cwiseMax(Scalar(0)).matrix();
    Index keep = 0;
    while (keep < s.size() && s[keep] > Scalar(0)) ++keep;
    if (shrunk_sigma) *shrunk_sigma = s;
    if (keep == 0) return MatrixX<Scalar>::Zero(m.rows(), m.cols());
    return dec.u.leftCols(keep) * s.head(keep).asDiagonal() * dec.v.leftCols(keep).transpose();
}

template <typename Scalar>
Scalar soft_threshold(Scalar x, Scalar tau) {
    if (!(tau >= Scalar(0))) throw std::invalid_argument("soft_threshold: tau must be nonnegative");
    const Scalar a = std::abs(x) - tau;
    return a > Scalar(0) ? std::copysign(a, x) : Scalar(0);
}

/// Entrywise sign(x) * max(|x| - tau, 0).
template <typename Derived>
auto soft_threshold(const Eigen::DenseBase<Derived>& x, typename Derived::Scalar tau) {
    using Scalar = typename Derived::Scalar;
    if (!(tau >= Scalar(0))) throw std::invalid_argument("soft_threshold: tau must be nonnegative");
    return x.unaryExpr([tau](Scalar v) { return soft_threshold(v, tau); }).eval();
}

template <typename Scalar>
DenseTensor<Scalar> soft_threshold(const DenseTensor<Scalar>& x, Scalar tau) {
    return DenseTensor<Scalar>(x.dims(), soft_threshold(x.data(), tau));
}

template <typename Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0;
    return Eigen::BDCSVD<MatrixX<typename Derived::Scalar>>(m).singularValues().sum();
}

}  // namespace c2f
