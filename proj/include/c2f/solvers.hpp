// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/multilinear.hpp"
#include "c2f/observation_mask.hpp"
#include "c2f/tensor.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace c2f {

/// Hyperparameters shared by the completion solvers. Fields a solver does not
/// use are ignored by it.
struct SolverConfig {
    double lambda1 = 1.0;   // TV weight
    double lambda2 = 10.0;  // factor trace-norm weight
    double lambda3 = 0.1;   // core ridge weight
    /// Per-mode TV switches; empty means 1 on the two spatial modes, 0 elsewhere.
    std::vector<int> beta;
    /// Per-mode trace-norm weights summing to 1; empty means 1/d each.
    std::vector<double> alpha;
    /// Multiplies every trace-norm shrinkage of the trace-norm solver.
    double rank_weight_scale = 1.0;
    double rho0 = 1e-3;
    double rho_growth = 1.05;
    double rho_max = 1e6;
    int max_iters = 500;
    double tol = 1e-5;
    std::uint64_t seed = 0;

    std::vector<int> beta_for(Index order) const;
    std::vector<double> alpha_for(Index order) const;
    /// Throws std::invalid_argument on any out-of-range field.
    void validate(Index order) const;
};

struct CompletionResult {
    Tensor restored;
    int iterations = 0;
    double final_relative_change = 0;
    std::vector<double> objective_trace;
    /// sqrt(sum_k ||Z_(k) - M_k||_F^2) per iteration for the trace-norm
    /// solver, ||Z - S x U||_F for the TV solver.
    std::vector<double> primal_residual_trace;
};

/// Called with every published iterate, after the observed entries are reset.
using IterateObserver = std::function<void(int iteration, const Tensor& iterate)>;

/// Trace-norm ADMM (HaLRTC family):
///   min sum_k alpha_k ||M_k||_*  s.t.  M_k = Z_(k),  Z = Y on Omega.
CompletionResult complete_tracenorm(const Tensor& y, const ObservationMask& omega, const SolverConfig& cfg,
                                    const IterateObserver& observer = {});

/// LRTC with TV on the factor-constrained Tucker form:
///   min lambda1 sum_k beta_k |F_k Z_(k)|_1 + lambda2 sum_k ||U_k||_* + lambda3 ||S||_F^2
///   s.t. Z = S x_0 U_0 ... x_{d-1} U_{d-1},  Z = Y on Omega,
/// with square factors U_k of size I_k x I_k.
CompletionResult complete_tv2(const Tensor& y, const ObservationMask& omega, const SolverConfig& cfg,
                              const IterateObserver& observer = {});

/// Value of the TV/trace-norm/ridge objective above at (z, s, factors).
double objective_tv2(const Tensor& z, const Tensor& s, const std::vector<Matrix>& factors, const SolverConfig& cfg);

/// First differences along rows: (F x)(i, :) = x(i, :) - x(i + 1, :).
Matrix tv_difference(const Matrix& x);
/// F^T applied to an (n - 1)-row matrix.
Matrix tv_difference_adjoint(const Matrix& g);
/// Explicit (n - 1) x n difference matrix.
Matrix tv_difference_matrix(Index n);

/// A pluggable completion method for the coarse-to-fine engine.
class CompletionSolver {
public:
    virtual ~CompletionSolver() = default;
    virtual std::string name() const = 0;
    virtual CompletionResult complete(const Tensor& y, const ObservationMask& omega, const SolverConfig& cfg,
                                      const IterateObserver& observer = {}) const = 0;
    /// Config used for a patch solve one level finer: the rank penalty grows by `mu`.
    virtual SolverConfig tighten_local_rank(SolverConfig cfg, double mu) const = 0;
};

class TraceNormSolver final : public CompletionSolver {
public:
    std::string name() const override { return "tracenorm"; }
    CompletionResult complete(const Tensor& y, const ObservationMask& omega, const SolverConfig& cfg,
                              const IterateObserver& observer = {}) const override {
        return complete_tracenorm(y, omega, cfg, observer);
    }
    SolverConfig tighten_local_rank(SolverConfig cfg, double mu) const override {
        cfg.rank_weight_scale *= mu;
        return cfg;
    }
};

class TV2Solver final : public CompletionSolver {
public:
    std::string name() const override { return "tv2"; }
    CompletionResult complete(const Tensor& y, const ObservationMask& omega, const SolverConfig& cfg,
                              const IterateObserver& observer = {}) const override {
        return complete_tv2(y, omega, cfg, observer);
    }
    SolverConfig tighten_local_rank(SolverConfig cfg, double mu) const override {
        cfg.lambda2 *= mu;
        return cfg;
    }
};

/// "tracenorm" (alias "halrtc") or "tv2" (alias "lrtc-tv2"); throws
/// std::invalid_argument for anything else.
std::unique_ptr<CompletionSolver> make_solver(std::string_view name);

namespace detail {
void check_completion_inputs(const Tensor& y, const ObservationMask& omega);
Tensor initial_iterate(const Tensor& y, const ObservationMask& omega);
double relative_change(const Tensor& next, const Tensor& prev);
}  // namespace detail

}  // namespace c2f
