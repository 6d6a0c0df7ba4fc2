// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/metrics.hpp"
#include "c2f/observation_mask.hpp"
#include "c2f/patch_grid.hpp"
#include "c2f/solvers.hpp"
#include "c2f/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace c2f {

inline constexpr double kDefaultEpsilon = 0.15;
inline constexpr double kShortcutEpsilon = 0.3;
inline constexpr Index kDefaultOverlap = 8;

/// Coarse-to-fine schedule.
struct C2FPlan {
    int stages = 3;  // number of fine stages F
    /// Initial replacement threshold; unset means 0.15, or 0.3 in short-cut mode.
    std::optional<double> epsilon0;
    double mu = 1.5;  // rank-penalty growth per fine stage
    /// Overlap per fine stage (index f - 1); missing entries use default_overlap.
    std::vector<Index> overlap;
    Index default_overlap = kDefaultOverlap;
    SolverConfig solver_config;
    /// Short-cut mode: the coarse stage followed by the finest grid only.
    bool shortcut = false;
    std::uint64_t seed = 0;
    /// Worker threads for the patch solves; 0 picks the hardware concurrency.
    int threads = 0;

    double initial_epsilon() const { return epsilon0.value_or(shortcut ? kShortcutEpsilon : kDefaultEpsilon); }
    Index overlap_for(int stage) const;
    std::vector<int> stage_sequence() const;
    void validate() const;
};

struct StageRecord {
    int stage = 0;
    std::vector<double> gaps;             // +inf for skipped or all-zero reference patches
    std::vector<std::uint8_t> replaced;   // r_k
    std::vector<int> iterations;          // solver iterations per patch, 0 when skipped
    double epsilon_used = 0;
    double epsilon_next = 0;
    SolverConfig config;                  // solver config used for this stage's patches
    std::vector<std::string> notes;
};

struct C2FResult {
    Tensor restored;
    Tensor coarse;
    std::vector<StageRecord> stage_records;
    /// Coarse result followed by one entry per fine stage, when ground truth is given.
    std::vector<MetricReport> metrics_trace;
    int coarse_iterations = 0;
};

/// ||a - b||_F / ||b||_F, or +inf when b is all zeros.
double gap(const Tensor& a, const Tensor& b);

/// True when the new patch replaces the current one.
inline bool replace_decision(double gap_value, double epsilon) { return gap_value < epsilon; }

/// Threshold for the stage after `stage_just_finished`:
///   after stage 1:   3/2 * max_k gaps[k]
///   after stage >=2: 3/2 * max_k gaps[k] * replaced[k]
/// Non-finite gaps are ignored. Falls back to `previous` when the max is 0.
double update_epsilon(int stage_just_finished, const std::vector<double>& gaps,
                      const std::vector<std::uint8_t>& replaced, double previous);

/// Runs the coarse stage and the fine stages of `plan`. When `coarse` is given
/// it is used as the coarse completion instead of solving again; `truth`
/// enables the per-stage metrics trace.
C2FResult run_c2f(const Tensor& y, const ObservationMask& omega, const C2FPlan& plan,
                  const CompletionSolver& solver, const Tensor* truth = nullptr, const Tensor* coarse = nullptr);

/// run_c2f with short-cut mode forced on.
C2FResult run_shortcut(const Tensor& y, const ObservationMask& omega, C2FPlan plan, const CompletionSolver& solver,
                       const Tensor* truth = nullptr, const Tensor* coarse = nullptr);

/// One JSON object per patch: stage, patch, gap, epsilon, replaced, iterations.
std::vector<std::string> stage_log_lines(const StageRecord& record);

}  // namespace c2f
