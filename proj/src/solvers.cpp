// SPDX-License-Identifier: MIT
#include "c2f/solvers.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace c2f {

std::vector<int> SolverConfig::beta_for(Index order) const {
    if (!beta.empty()) return beta;
    std::vector<int> b(static_cast<std::size_t>(order), 0);
    for (Index k = 0; k < std::min<Index>(order, 2); ++k) b[static_cast<std::size_t>(k)] = 1;
    return b;
}

std::vector<double> SolverConfig::alpha_for(Index order) const {
    if (!alpha.empty()) return alpha;
    return std::vector<double>(static_cast<std::size_t>(order), 1.0 / static_cast<double>(order));
}

void SolverConfig::validate(Index order) const {
    if (!(lambda1 >= 0) || !(lambda2 >= 0) || !(lambda3 >= 0))
        throw std::invalid_argument("solver config: lambda weights must be nonnegative");
    if (!beta.empty()) {
        if (static_cast<Index>(beta.size()) != order)
            throw std::invalid_argument("solver config: beta needs one flag per mode");
        for (int b : beta)
            if (b != 0 && b != 1) throw std::invalid_argument("solver config: beta flags must be 0 or 1");
    }
    if (!alpha.empty()) {
        if (static_cast<Index>(alpha.size()) != order)
            throw std::invalid_argument("solver config: alpha needs one weight per mode");
        for (double a : alpha)
            if (!(a >= 0)) throw std::invalid_argument("solver config: alpha weights must be nonnegative");
        if (std::abs(std::accumulate(alpha.begin(), alpha.end(), 0.0) - 1.0) > 1e-12)
            throw std::invalid_argument("solver config: alpha weights must sum to 1");
    }
    if (!(rank_weight_scale > 0)) throw std::invalid_argument("solver config: rank_weight_scale must be positive");
    if (!(rho0 > 0) || !(rho_growth >= 1) || !(rho_max >= rho0))
        throw std::invalid_argument("solver config: need rho0 > 0, rho_growth >= 1, rho_max >= rho0");
    if (max_iters < 1) throw std::invalid_argument("solver config: max_iters must be positive");
    if (!(tol > 0)) throw std::invalid_argument("solver config: tol must be positive");
}

std::unique_ptr<CompletionSolver> make_solver(std::string_view name) {
    if (name == "tracenorm" || name == "halrtc") return std::make_unique<TraceNormSolver>();
    if (name == "tv2" || name == "lrtc-tv2") return std::make_unique<TV2Solver>();
    throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

Matrix tv_difference(const Matrix& x) {
    const Index n = x.rows();
    if (n < 2) return Matrix(0, x.cols());
    return x.topRows(n - 1) - x.bottomRows(n - 1);
}

Matrix tv_difference_adjoint(const Matrix& g) {
    const Index m = g.rows();
    Matrix out = Matrix::Zero(m + 1, g.cols());
    if (m == 0) return out;
    out.topRows(m) += g;
    out.bottomRows(m) -= g;
    return out;
}

Matrix tv_difference_matrix(Index n) {
    Matrix f = Matrix::Zero(std::max<Index>(n - 1, 0), n);
    for (Index i = 0; i + 1 < n; ++i) {
        f(i, i) = 1;
        f(i, i + 1) = -1;
    }
    return f;
}

double objective_tv2(const Tensor& z, const Tensor& s, const std::vector<Matrix>& factors, const SolverConfig& cfg) {
    const Index d = z.order();
    if (static_cast<Index>(factors.size()) != d || s.order() != d)
        throw std::invalid_argument("objective_tv2: need one factor per mode");
    for (Index k = 0; k < d; ++k) {
        const auto& u = factors[static_cast<std::size_t>(k)];
        if (u.rows() != z.dim(k) || u.cols() != s.dim(k))
            throw std::invalid_argument("objective_tv2: factor " + std::to_string(k) + " has wrong shape");
    }
    const auto beta = cfg.beta_for(d);
    double tv = 0, trace = 0;
    for (Index k = 0; k < d; ++k) {
        if (beta[static_cast<std::size_t>(k)]) tv += tv_difference(matricize(z, k)).cwiseAbs().sum();
        trace += nuclear_norm(factors[static_cast<std::size_t>(k)]);
    }
    return cfg.lambda1 * tv + cfg.lambda2 * trace + cfg.lambda3 * s.data().squaredNorm();
}

namespace detail {

void check_completion_inputs(const Tensor& y, const ObservationMask& omega) {
    if (y.dims() != omega.dims())
        throw std::invalid_argument("observation mask shape " + shape_string(omega.dims()) +
                                    " does not match tensor shape " + shape_string(y.dims()));
    if (omega.empty()) throw std::invalid_argument("observation set is empty");
    const auto flags = omega.flags();
    for (Index i = 0; i < y.size(); ++i)
        if (flags[static_cast<std::size_t>(i)] && !std::isfinite(y.data()[i]))
            throw std::domain_error("observed values must be finite");
}

Tensor initial_iterate(const Tensor& y, const ObservationMask& omega) {
    Tensor z(y.dims());
    omega.project(z, y);
    return z;
}

double relative_change(const Tensor& next, const Tensor& prev) {
    const double denom = prev.data().norm();
    const double diff = (next.data() - prev.data()).norm();
    return denom > 0 ? diff / denom : diff;
}

}  // namespace detail

}  // namespace c2f
