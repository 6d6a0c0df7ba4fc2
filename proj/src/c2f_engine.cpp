// SPDX-License-Identifier: MIT
#include "c2f/c2f.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace c2f {

namespace {

// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots; the first exception (lowest index) is rethrown.
template <typename Body>
void parallel_for(Index n, int threads, Body body) {
    const int workers = std::max(1, std::min<int>(threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()),
                                                  static_cast<int>(n)));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    if (workers == 1) {
        for (Index i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        std::atomic<Index> next{0};
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (Index i; (i = next.fetch_add(1)) < n;) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[static_cast<std::size_t>(i)] = std::current_exception();
                    }
                }
            });
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

class PatchSolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace

Index C2FPlan::overlap_for(int stage) const {
    const auto i = static_cast<std::size_t>(stage - 1);
    return i < overlap.size() ? overlap[i] : default_overlap;
}

std::vector<int> C2FPlan::stage_sequence() const {
    std::vector<int> seq;
    if (stages <= 0) return seq;
    if (shortcut) return {stages};
    for (int f = 1; f <= stages; ++f) seq.push_back(f);
    return seq;
}

void C2FPlan::validate() const {
    if (stages < 0) throw std::invalid_argument("plan: number of fine stages must be >= 0");
    if (!(mu > 1)) throw std::invalid_argument("plan: mu must be > 1");
    if (!(initial_epsilon() > 0)) throw std::invalid_argument("plan: epsilon0 must be > 0");
    if (default_overlap < 0) throw std::invalid_argument("plan: overlap must be >= 0");
    for (Index o : overlap)
        if (o < 0) throw std::invalid_argument("plan: overlap must be >= 0");
}

double gap(const Tensor& a, const Tensor& b) {
    if (a.dims() != b.dims())
        throw std::invalid_argument("gap: shape mismatch " + shape_string(a.dims()) + " vs " + shape_string(b.dims()));
    const double denom = b.data().norm();
    if (denom == 0) return std::numeric_limits<double>::infinity();
    return (a.data() - b.data()).norm() / denom;
}

double update_epsilon(int stage_just_finished, const std::vector<double>& gaps,
                      const std::vector<std::uint8_t>& replaced, double previous) {
    if (gaps.size() != replaced.size()) throw std::invalid_argument("update_epsilon: gaps and replacement record differ in length");
    double peak = 0;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        if (!std::isfinite(gaps[k])) continue;
        const double v = stage_just_finished <= 1 ? gaps[k] : gaps[k] * (replaced[k] ? 1.0 : 0.0);
        peak = std::max(peak, v);
    }
    return peak > 0 ? 1.5 * peak : previous;
}

C2FResult run_c2f(const Tensor& y, const ObservationMask& omega, const C2FPlan& plan, const CompletionSolver& solver,
                  const Tensor* truth, const Tensor* coarse) {
    plan.validate();
    if (y.dims() != omega.dims()) throw std::invalid_argument("observation mask does not match the tensor shape");
    if (truth && truth->dims() != y.dims()) throw std::invalid_argument("ground truth does not match the tensor shape");

    C2FResult out{y, y, {}, {}, 0};
    Tensor current = y;
    if (coarse) {
        if (coarse->dims() != y.dims()) throw std::invalid_argument("coarse completion does not match the tensor shape");
        current = *coarse;
    } else {
        auto res = solver.complete(y, omega, plan.solver_config);
        out.coarse_iterations = res.iterations;
        current = std::move(res.restored);
    }
    omega.project(current, y);
    out.coarse = current;
    if (truth) out.metrics_trace.push_back(evaluate(current, *truth));

    double epsilon = plan.initial_epsilon();
    SolverConfig cfg = plan.solver_config;
    int tightened = 0;
    for (int f : plan.stage_sequence()) {
        while (tightened < f) {
            cfg = solver.tighten_local_rank(cfg, plan.mu);
            ++tightened;
        }
        const PatchGrid grid = make_grid(y.dims(), f, plan.overlap_for(f));
        const PatchSet observed = extract(y, grid);
        const auto masks = extract(omega, grid);
        const PatchSet reference = extract(current, grid);
        const Index n = grid.count();

        StageRecord rec;
        rec.stage = f;
        rec.config = cfg;
        rec.epsilon_used = epsilon;
        rec.gaps.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
        rec.replaced.assign(static_cast<std::size_t>(n), 0);
        rec.iterations.assign(static_cast<std::size_t>(n), 0);
        std::vector<std::optional<Tensor>> fresh(static_cast<std::size_t>(n));

        parallel_for(n, plan.threads, [&](Index k) {
            const auto ku = static_cast<std::size_t>(k);
            if (masks[ku].empty()) return;
            try {
                auto res = solver.complete(observed.patches[ku], masks[ku], cfg);
                rec.iterations[ku] = res.iterations;
                rec.gaps[ku] = gap(res.restored, reference.patches[ku]);
                fresh[ku] = std::move(res.restored);
            } catch (const std::exception& e) {
                throw PatchSolveError("stage " + std::to_string(f) + ", patch " + std::to_string(k) + ": " + e.what());
            }
        });

        std::vector<std::pair<Index, Tensor>> accepted;
        for (Index k = 0; k < n; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            if (!fresh[ku]) {
                rec.notes.push_back("patch " + std::to_string(k) + " has no observed entries; kept");
                continue;
            }
            if (!std::isfinite(rec.gaps[ku]))
                rec.notes.push_back("patch " + std::to_string(k) + " has an all-zero reference; kept");
            if (replace_decision(rec.gaps[ku], epsilon)) {
                rec.replaced[ku] = 1;
                accepted.emplace_back(k, std::move(*fresh[ku]));
            }
        }
        current = merge(current, accepted, grid);
        omega.project(current, y);

        rec.epsilon_next = update_epsilon(f, rec.gaps, rec.replaced, epsilon);
        if (f >= 2 && std::find(rec.replaced.begin(), rec.replaced.end(), 1) == rec.replaced.end())
            rec.notes.push_back("no patch replaced; threshold carried over");
        epsilon = rec.epsilon_next;
        if (truth) out.metrics_trace.push_back(evaluate(current, *truth));
        out.stage_records.push_back(std::move(rec));
    }
    omega.project(current, y);
    out.restored = std::move(current);
    return out;
}

C2FResult run_shortcut(const Tensor& y, const ObservationMask& omega, C2FPlan plan, const CompletionSolver& solver,
                       const Tensor* truth, const Tensor* coarse) {
    plan.shortcut = true;
    return run_c2f(y, omega, plan, solver, truth, coarse);
}

std::vector<std::string> stage_log_lines(const StageRecord& record) {
    std::vector<std::string> lines;
    for (std::size_t k = 0; k < record.gaps.size(); ++k) {
        nlohmann::ordered_json j;
        j["stage"] = record.stage;
        j["patch"] = k;
        if (std::isfinite(record.gaps[k]))
            j["gap"] = record.gaps[k];
        else
            j["gap"] = nullptr;
        j["epsilon"] = record.epsilon_used;
        j["replaced"] = record.replaced[k] != 0;
        j["iterations"] = record.iterations[k];
        j["lambda2"] = record.config.lambda2;
        j["rank_weight_scale"] = record.config.rank_weight_scale;
        lines.push_back(j.dump());
    }
    return lines;
}

}  // namespace c2f
