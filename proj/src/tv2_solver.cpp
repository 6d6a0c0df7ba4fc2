// SPDX-License-Identifier: MIT
#include "c2f/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace c2f {

namespace {

// Product over all modes except `skip` (pass -1 to keep every mode).
Tensor product_except(const Tensor& s, const std::vector<Matrix>& u, Index skip) {
    Tensor out = s;
    for (Index k = 0; k < s.order(); ++k)
        if (k != skip) out = mode_product(out, u[static_cast<std::size_t>(k)], k);
    return out;
}

// Elementwise division of `t` by  sum_k w_k[i_k] + shift  or  prod_k w_k[i_k] + shift.
void divide_by_separable(Tensor& t, const std::vector<Vector>& w, double shift, bool product) {
    const Shape& dims = t.dims();
    const Index d = t.order();
    std::vector<Index> idx(static_cast<std::size_t>(d), 0);
    for (Index lin = 0; lin < t.size(); ++lin) {
        double acc = product ? 1.0 : 0.0;
        for (Index k = 0; k < d; ++k) {
            const auto& wk = w[static_cast<std::size_t>(k)];
            if (wk.size() == 0) continue;
            const double v = wk[idx[static_cast<std::size_t>(k)]];
            acc = product ? acc * v : acc + v;
        }
        const double denom = acc + shift;
        t.data()[lin] = denom > 1e-14 ? t.data()[lin] / denom : 0.0;
        for (Index k = 0; k < d; ++k) {
            auto& i = idx[static_cast<std::size_t>(k)];
            if (++i < dims[static_cast<std::size_t>(k)]) break;
            i = 0;
        }
    }
}


// t + sum_k beta_k F_k^T F_k t, each term applied along mode k in place.
Tensor apply_system(const Tensor& t, const std::vector<int>& beta) {
    Tensor out = t;
    const Index n = t.size();
    Index stride = 1;
    for (Index k = 0; k < t.order(); ++k) {
        const Index len = t.dim(k);
        if (beta[static_cast<std::size_t>(k)] && len > 1) {
            const double* x = t.data().data();
            double* o = out.data().data();
            for (Index lin = 0; lin < n; ++lin) {
                const Index i = (lin / stride) % len;
                double acc = 0;
                if (i > 0) acc += x[lin] - x[lin - stride];
                if (i + 1 < len) acc += x[lin] - x[lin + stride];
                o[lin] += acc;
            }
        }
        stride *= len;
    }
    return out;
}

// Conjugate gradients on the unobserved entries of `z` for
// apply_system(z) = rhs; observed entries stay fixed. `z` is the warm start.
void solve_masked(Tensor& z, const Tensor& rhs, const std::vector<int>& beta, const ObservationMask& omega,
                  double rel_tol, int max_steps = 100) {
    const auto flags = omega.flags();
    auto restrict_free = [&](Vector& v) {
        for (Index i = 0; i < v.size(); ++i)
            if (flags[static_cast<std::size_t>(i)]) v[i] = 0;
    };
    Vector r = rhs.data() - apply_system(z, beta).data();
    restrict_free(r);
    Vector b = rhs.data();
    restrict_free(b);
    const double stop = rel_tol * std::max(b.norm(), 1e-300);
    Vector p = r;
    double rr = r.squaredNorm();
    Tensor dir(z.dims());
    for (int step = 0; step < max_steps && std::sqrt(rr) > stop; ++step) {
        dir.data() = p;
        Vector ap = apply_system(dir, beta).data();
        restrict_free(ap);
        const double a = rr / p.dot(ap);
        z.data() += a * p;
        r -= a * ap;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
}

}  // namespace

CompletionResult complete_tv2(const Tensor& y, const ObservationMask& omega, const SolverConfig& cfg,
                              const IterateObserver& observer) {
    detail::check_completion_inputs(y, omega);
    const Index d = y.order();
    cfg.validate(d);
    const auto beta = cfg.beta_for(d);
    const auto du = static_cast<std::size_t>(d);

    Tensor z = detail::initial_iterate(y, omega);
    Tensor core = z;
    Tensor gamma(y.dims());
    std::vector<Matrix> u(du), v(du), psi(du), g(du), phi(du);
    for (Index k = 0; k < d; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        u[ku] = Matrix::Identity(y.dim(k), y.dim(k));
        v[ku] = u[ku];
        psi[ku] = Matrix::Zero(y.dim(k), y.dim(k));
        if (beta[ku]) {
            g[ku] = tv_difference(matricize(z, k));
            phi[ku] = Matrix::Zero(g[ku].rows(), g[ku].cols());
        }
    }

    CompletionResult res{z, 0, 0, {}, {}};
    double rho = cfg.rho0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        // TV splits
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (!beta[ku]) continue;
            g[ku] = soft_threshold(tv_difference(matricize(z, k)) - phi[ku] / rho, cfg.lambda1 / rho);
        }
        // trace-norm splits
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            v[ku] = svt(u[ku] - psi[ku] / rho, cfg.lambda2 / rho);
        }

        // factors, one mode at a time:
        //   min ||X_(k) - U_k B_k||^2 + ||U_k - (V_k + Psi_k / rho)||^2
        const Tensor x = z + gamma * (1.0 / rho);
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const Matrix b = matricize(product_except(core, u, k), k);
            Matrix gram = b * b.transpose();
            gram.diagonal().array() += 1.0;
            const Matrix rhs = matricize(x, k) * b.transpose() + v[ku] + psi[ku] / rho;
            u[ku] = gram.llt().solve(rhs.transpose()).transpose();
        }

        // core: ridge least squares, diagonalized through eig(U_k^T U_k)
        {
            std::vector<Matrix> q(du);
            std::vector<Vector> ev(du);
            Tensor t = x;
            for (Index k = 0; k < d; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                Eigen::SelfAdjointEigenSolver<Matrix> es(u[ku].transpose() * u[ku]);
                q[ku] = es.eigenvectors();
                ev[ku] = es.eigenvalues().cwiseMax(0.0);
                t = mode_product(t, (u[ku] * q[ku]).transpose(), k);
            }
            divide_by_separable(t, ev, 2.0 * cfg.lambda3 / rho, true);
            for (Index k = 0; k < d; ++k) t = mode_product(t, q[static_cast<std::size_t>(k)], k);
            core = std::move(t);
        }
        const Tensor low_rank = product_except(core, u, -1);

        // Z: (I + sum_k beta_k F_k^T F_k) Z = (S x U - Gamma / rho) + sum_k beta_k F_k^T (G_k + Phi_k / rho)
        // over the unobserved entries, with the observed ones held at Y
        Tensor rhs = low_rank - gamma * (1.0 / rho);
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (!beta[ku]) continue;
            rhs += fold(tv_difference_adjoint(g[ku] + phi[ku] / rho), k, y.dims());
        }
        Tensor next = z;
        solve_masked(next, rhs, beta, omega, 1e-4);
        // multipliers
        const Vector primal = next.data() - low_rank.data();
        gamma.data() += rho * primal;
        for (Index k = 0; k < d; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            psi[ku] += rho * (v[ku] - u[ku]);
            if (beta[ku]) phi[ku] += rho * (g[ku] - tv_difference(matricize(next, k)));
        }

        res.final_relative_change = detail::relative_change(next, z);
        z = std::move(next);
        res.iterations = it;
        res.objective_trace.push_back(objective_tv2(z, core, u, cfg));
        res.primal_residual_trace.push_back(primal.norm());
        if (observer) observer(it, z);
        rho = std::min(rho * cfg.rho_growth, cfg.rho_max);
        if (res.final_relative_change < cfg.tol) break;
    }
    res.restored = std::move(z);
    return res;
}

}  // namespace c2f
