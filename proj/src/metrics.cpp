// SPDX-License-Identifier: MIT
#include "c2f/metrics.hpp"

#include "c2f/linalg.hpp"
#include "c2f/multilinear.hpp"
#include "c2f/patch_grid.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace c2f {

namespace {

void check_pair(const Tensor& z, const Tensor& truth) {
    if (z.dims() != truth.dims())
        throw std::invalid_argument("shape mismatch " + shape_string(z.dims()) + " vs " + shape_string(truth.dims()));
}

}  // namespace

double rse(const Tensor& z, const Tensor& truth) {
    check_pair(z, truth);
    const double denom = truth.data().norm();
    if (denom == 0) throw std::invalid_argument("rse: reference tensor is zero");
    return (z.data() - truth.data()).norm() / denom;
}

double psnr(const Tensor& z, const Tensor& truth) {
    check_pair(z, truth);
    const double sq = (z.data() - truth.data()).squaredNorm();
    if (sq == 0) return std::numeric_limits<double>::infinity();
    const double peak = truth.data().maxCoeff();
    const double mse = sq / static_cast<double>(truth.size());
    return 10.0 * std::log10(peak * peak / mse);
}

MetricReport evaluate(const Tensor& z, const Tensor& truth) {
    return {psnr(z, truth), rse(z, truth), truth.dims(), truth.data().maxCoeff()};
}

double rpr(const Tensor& patch, double mass_fraction) {
    if (patch.order() < 2) throw std::invalid_argument("rpr: need a spatial patch");
    const Matrix m = matricize(patch, 0);
    if (m.rows() < 2 && m.cols() < 2) throw std::invalid_argument("rpr: degenerate one-pixel patch");
    const Vector sigma = Eigen::BDCSVD<Matrix>(m).singularValues();
    const double total = sigma.sum();
    const Index full = std::min(m.rows(), m.cols());
    if (total == 0) return 1.0 / static_cast<double>(full);
    const double target = mass_fraction * total;
    double acc = 0;
    Index r = 0;
    while (r < sigma.size()) {
        acc += sigma[r++];
        if (acc >= target) break;
    }
    return static_cast<double>(r) / static_cast<double>(full);
}

std::string stage_label(int stage) { return stage == 0 ? "coarse" : "fine-" + std::to_string(stage); }

std::vector<RPRReport> rpr_table(const Tensor& truth, int max_stage) {
    if (max_stage < 0) throw std::invalid_argument("rpr_table: stage count must be nonnegative");
    std::vector<RPRReport> out;
    for (int f = 0; f <= max_stage; ++f) {
        const auto grid = make_grid(truth.dims(), f, 0);
        RPRReport rep;
        rep.stage = f;
        for (const auto& region : grid.patches) rep.per_patch_rpr.push_back(rpr(extract_region(truth, region)));
        rep.average_rpr = std::accumulate(rep.per_patch_rpr.begin(), rep.per_patch_rpr.end(), 0.0) /
                          static_cast<double>(rep.per_patch_rpr.size());
        out.push_back(std::move(rep));
    }
    return out;
}

}  // namespace c2f
