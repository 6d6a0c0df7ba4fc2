// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/tensor.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace c2f {

/// Set of observed entries of a tensor, stored as a 0/1 indicator in the
/// tensor's linear order.
class ObservationMask {
public:
    explicit ObservationMask(Shape dims, bool observed = true)
        : dims_(std::move(dims)) {
        check_shape(dims_);
        flags_.assign(static_cast<std::size_t>(shape_size(dims_)), observed ? 1 : 0);
        count_ = observed ? shape_size(dims_) : 0;
    }

    ObservationMask(Shape dims, std::vector<std::uint8_t> flags) : dims_(std::move(dims)) {
        check_shape(dims_);
        if (static_cast<Index>(flags.size()) != shape_size(dims_))
            throw std::invalid_argument("mask indicator length does not match shape " + shape_string(dims_));
        flags_ = std::move(flags);
        count_ = 0;
        for (auto& f : flags_) {
            f = f ? 1 : 0;
            count_ += f;
        }
    }

    /// Builds the mask from explicit multi-indices; rejects out-of-range and
    /// repeated entries.
    static ObservationMask from_indices(const Shape& dims, const std::vector<std::vector<Index>>& indices) {
        ObservationMask m(dims, false);
        for (const auto& idx : indices) {
            if (idx.size() != dims.size()) throw std::invalid_argument("index arity does not match mask order");
            Index offset = 0, stride = 1;
            for (std::size_t n = 0; n < dims.size(); ++n) {
                if (idx[n] < 0 || idx[n] >= dims[n]) throw std::out_of_range("observed index out of range");
                offset += idx[n] * stride;
                stride *= dims[n];
            }
            auto& f = m.flags_[static_cast<std::size_t>(offset)];
            if (f) throw std::invalid_argument("duplicate observed index");
            f = 1;
            ++m.count_;
        }
        return m;
    }

    const Shape& dims() const { return dims_; }
    Index size() const { return static_cast<Index>(flags_.size()); }
    Index count() const { return count_; }
    bool empty() const { return count_ == 0; }
    double observed_fraction() const { return static_cast<double>(count_) / static_cast<double>(size()); }

    bool observed(Index linear) const { return flags_[static_cast<std::size_t>(linear)] != 0; }
    std::span<const std::uint8_t> flags() const { return flags_; }

    std::vector<Index> linear_indices() const {
        std::vector<Index> out;
        out.reserve(static_cast<std::size_t>(count_));
        for (std::size_t i = 0; i < flags_.size(); ++i)
            if (flags_[i]) out.push_back(static_cast<Index>(i));
        return out;
    }

    template <typename Scalar = double>
    DenseTensor<Scalar> indicator() const {
        DenseTensor<Scalar> t(dims_);
        for (std::size_t i = 0; i < flags_.size(); ++i) t.data()[static_cast<Index>(i)] = flags_[i] ? 1 : 0;
        return t;
    }

    /// Overwrites the observed entries of `z` with those of `y`.
    template <typename Scalar>
    void project(DenseTensor<Scalar>& z, const DenseTensor<Scalar>& y) const {
        if (z.dims() != dims_ || y.dims() != dims_) throw std::invalid_argument("mask/tensor shape mismatch");
        auto& zd = z.data();
        const auto& yd = y.data();
        for (std::size_t i = 0; i < flags_.size(); ++i)
            if (flags_[i]) zd[static_cast<Index>(i)] = yd[static_cast<Index>(i)];
    }

    friend bool operator==(const ObservationMask& a, const ObservationMask& b) {
        return a.dims_ == b.dims_ && a.flags_ == b.flags_;
    }

private:
    Shape dims_;
    std::vector<std::uint8_t> flags_;
    Index count_ = 0;
};

}  // namespace c2f
