// SPDX-License-Identifier: MIT
#pragma once

#include "c2f/c2f.hpp"
#include "c2f/io.hpp"
#include "c2f/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace c2f {

enum class RunMode { pure, c2f, shortcut };

RunMode parse_run_mode(const std::string& s);
std::string to_string(RunMode m);

/// Applies one solver setting by key (lambda1, rho0, max_iters, beta, ...).
/// Returns false for unknown keys; throws std::invalid_argument for bad values.
bool apply_solver_setting(SolverConfig& cfg, const std::string& key, const std::string& value);

/// Grid of restorations: every image x ratio x solver x mode.
struct ExperimentSpec {
    std::vector<std::filesystem::path> images;
    std::vector<double> missing_ratios = {0.7, 0.8, 0.9};
    std::vector<std::string> solvers = {"tv2"};
    std::vector<RunMode> modes = {RunMode::pure, RunMode::c2f};
    C2FPlan plan;
    /// Per-solver settings applied on top of plan.solver_config, e.g. "tv2.rho0".
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> solver_overrides;
    std::uint64_t mask_seed = 0;
    MaskMode mask_mode = MaskMode::per_entry;
    std::filesystem::path output_dir = "results";
    bool write_images = true;
    bool write_rpr = true;

    SolverConfig config_for(const std::string& solver) const;
    void validate() const;
};

/// Parses "key = value" lines; '#' starts a comment, lists are comma-separated
/// and relative paths resolve against `base_dir`.
ExperimentSpec parse_experiment_spec(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

struct ExperimentRow {
    std::string image;
    double ratio = 0;
    std::string solver;
    RunMode mode = RunMode::pure;
    double psnr = 0;
    double rse = 0;
    double wall_time = 0;  // seconds; c2f and shortcut include the coarse solve
    std::uint64_t seed = 0;
    std::string error;     // empty on success

    bool ok() const { return error.empty(); }
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::vector<std::pair<std::string, std::vector<RPRReport>>> rpr;
    /// Per-cell stage records for c2f and shortcut rows, in row order.
    std::map<std::size_t, std::vector<StageRecord>> stages;
};

inline constexpr int kResultsSchemaVersion = 1;
inline constexpr int kStageLogSchemaVersion = 1;

std::string results_csv(const std::vector<ExperimentRow>& rows);
std::string rpr_csv(const std::vector<std::pair<std::string, std::vector<RPRReport>>>& rpr);
std::string stage_log(const std::vector<StageRecord>& records);

/// Base name used for per-cell output files.
std::string cell_name(const ExperimentRow& row);

using RowCallback = std::function<void(const ExperimentRow&)>;

/// Runs the grid and writes results.csv, rpr.csv, masks/, images/ and logs/
/// under spec.output_dir. One mask per (image, ratio) is shared by every
/// solver and mode; a pure solve is reused as the coarse stage of c2f and
/// shortcut. Solver failures are recorded in the row and the run continues.
ExperimentReport run_experiment(const ExperimentSpec& spec, const RowCallback& on_row = {});

}  // namespace c2f
