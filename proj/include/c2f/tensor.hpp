// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace c2f {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline Index shape_size(const Shape& dims) {
    return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& dims) {
    std::string s = "(";
    for (std::size_t n = 0; n < dims.size(); ++n) {
        if (n) s += ",";
        s += std::to_string(dims[n]);
    }
    return s + ")";
}

inline void check_shape(const Shape& dims) {
    if (dims.empty()) throw std::invalid_argument("tensor shape must have at least one mode");
    for (Index d : dims)
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive, got " + shape_string(dims));
}

/// Dense d-way array.
///
/// Entries are stored with the first index varying fastest, so the linear
/// offset of (i_0, ..., i_{d-1}) is sum_n i_n * prod_{m<n} I_m. This is the
/// layout under which the mode-0 unfolding is a plain reshape, and the column
/// index of the mode-k unfolding is the same sum with mode k skipped.
template <typename Scalar>
class DenseTensor {
public:
    using Vector = VectorX<Scalar>;

    explicit DenseTensor(Shape dims) : dims_(std::move(dims)) {
        check_shape(dims_);
        data_ = Vector::Zero(shape_size(dims_));
    }

    DenseTensor(Shape dims, Vector data) : dims_(std::move(dims)), data_(std::move(data)) {
        check_shape(dims_);
        if (data_.size() != shape_size(dims_))
            throw std::invalid_argument("data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_string(dims_));
    }

    static DenseTensor constant(Shape dims, Scalar value) {
        DenseTensor t(std::move(dims));
        t.data_.setConstant(value);
        return t;
    }

    const Shape& dims() const { return dims_; }
    Index dim(Index k) const { return dims_.at(static_cast<std::size_t>(k)); }
    Index order() const { return static_cast<Index>(dims_.size()); }
    Index size() const { return data_.size(); }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    Index linear_index(std::span<const Index> idx) const {
        if (static_cast<std::size_t>(idx.size()) != dims_.size())
            throw std::invalid_argument("index arity does not match tensor order");
        Index offset = 0, stride = 1;
        for (std::size_t n = 0; n < dims_.size(); ++n) {
            if (idx[n] < 0 || idx[n] >= dims_[n]) throw std::out_of_range("tensor index out of range");
            offset += idx[n] * stride;
            stride *= dims_[n];
        }
        return offset;
    }

    Scalar operator()(std::span<const Index> idx) const { return data_[linear_index(idx)]; }
    Scalar& operator()(std::span<const Index> idx) { return data_[linear_index(idx)]; }

    template <typename... I>
        requires(sizeof...(I) > 0 && (std::is_integral_v<I> && ...))
    Scalar operator()(I... i) const {
        const Index idx[] = {static_cast<Index>(i)...};
        return (*this)(std::span<const Index>(idx));
    }

    template <typename... I>
        requires(sizeof...(I) > 0 && (std::is_integral_v<I> && ...))
    Scalar& operator()(I... i) {
        const Index idx[] = {static_cast<Index>(i)...};
        return (*this)(std::span<const Index>(idx));
    }

    bool all_finite() const { return data_.allFinite(); }

    DenseTensor& operator+=(const DenseTensor& o) {
        check_same(o);
        data_ += o.data_;
        return *this;
    }
    DenseTensor& operator-=(const DenseTensor& o) {
        check_same(o);
        data_ -= o.data_;
        return *this;
    }
    DenseTensor& operator*=(Scalar c) {
        data_ *= c;
        return *this;
    }

    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(DenseTensor a, Scalar c) { return a *= c; }
    friend DenseTensor operator*(Scalar c, DenseTensor a) { return a *= c; }

    friend bool operator==(const DenseTensor& a, const DenseTensor& b) {
        return a.dims_ == b.dims_ && a.data_ == b.data_;
    }

private:
    void check_same(const DenseTensor& o) const {
        if (o.dims_ != dims_)
            throw std::invalid_argument("shape mismatch " + shape_string(dims_) + " vs " + shape_string(o.dims_));
    }

    Shape dims_;
    Vector data_;
};

using Tensor = DenseTensor<double>;
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

}  // namespace c2f
