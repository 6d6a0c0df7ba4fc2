// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/tensor.hpp"

#include <limits>
#include <string>
#include <vector>

namespace c2f {

/// ||z - truth||_F / ||truth||_F.
double rse(const Tensor& z, const Tensor& truth);

/// 10 log10(MAX^2 / MSE) with MAX the largest entry of `truth` and MSE the
/// mean squared error over all entries. Returns +infinity when z == truth.
double psnr(const Tensor& z, const Tensor& truth);

struct MetricReport {
    double psnr = 0;
    double rse = 0;
    Shape dims;
    double max_pixel = 0;
};

MetricReport evaluate(const Tensor& z, const Tensor& truth);

/// Relative patch rank: the number of leading singular values of the mode-0
/// unfolding (H x W*C) that carry 90% of the nuclear mass, divided by
/// min(H, W*C).
double rpr(const Tensor& patch, double mass_fraction = 0.9);

struct RPRReport {
    int stage = 0;  // 0 = whole image, f = 2^f x 2^f grid
    std::vector<double> per_patch_rpr;
    double average_rpr = 0;
};

std::string stage_label(int stage);

/// Average RPR over non-overlapping 2^f x 2^f grids for f = 0..max_stage.
std::vector<RPRReport> rpr_table(const Tensor& truth, int max_stage);

}  // namespace c2f
