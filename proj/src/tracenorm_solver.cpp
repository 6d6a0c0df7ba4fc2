// SPDX-License-Identifier: MIT
#include "c2f/solvers.hpp"

#include <cmath>

namespace c2f {

CompletionResult complete_tracenorm(const Tensor& y, const ObservationMask& omega, const SolverConfig& cfg,
                                    const IterateObserver& observer) {
    detail::check_completion_inputs(y, omega);
    const Index d = y.order();
    cfg.validate(d);
    const auto alpha = cfg.alpha_for(d);

    Tensor z = detail::initial_iterate(y, omega);
    std::vector<Tensor> duals(static_cast<std::size_t>(d), Tensor(y.dims()));
    std::vector<Tensor> low_rank(static_cast<std::size_t>(d), Tensor(y.dims()));

    CompletionResult res{z, 0, 0, {}, {}};
    double rho = cfg.rho0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        double objective = 0;
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            Vector shrunk;
            const Tensor shifted = z + duals[ku] * (1.0 / rho);
            const Matrix m = svt(matricize(shifted, k), cfg.rank_weight_scale * alpha[ku] / rho, &shrunk);
            low_rank[ku] = fold(m, k, y.dims());
            objective += alpha[ku] * shrunk.sum();
        }

        Tensor next(y.dims());
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            next.data() += low_rank[ku].data() - duals[ku].data() / rho;
        }
        next *= 1.0 / static_cast<double>(d);
        omega.project(next, y);

        double primal_sq = 0;
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const Vector r = next.data() - low_rank[ku].data();
            duals[ku].data() += rho * r;
            primal_sq += r.squaredNorm();
        }

        res.final_relative_change = detail::relative_change(next, z);
        z = std::move(next);
        res.iterations = it;
        res.objective_trace.push_back(objective);
        res.primal_residual_trace.push_back(std::sqrt(primal_sq));
        if (observer) observer(it, z);
        rho = std::min(rho * cfg.rho_growth, cfg.rho_max);

        // a still iterate only counts once every M_k agrees with it; early on
        // the threshold can zero whole unfoldings and freeze Z
        const double primal_rel = std::sqrt(primal_sq / static_cast<double>(d)) / std::max(z.data().norm(), 1e-300);
        if (res.final_relative_change < cfg.tol && primal_rel < cfg.tol) break;
    }
    res.restored = std::move(z);
    return res;
}

}  // namespace c2f
