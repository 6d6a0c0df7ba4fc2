// SPDX-License-Identifier: MIT
// c2f command line: single restorations, experiment grids, RPR tables and mask files.
#include "c2f/c2f.hpp"
#include "c2f/experiment.hpp"
#include "c2f/io.hpp"
#include "c2f/metrics.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace c2f;

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kSolver = 3 };

// Wraps errors from the solve itself so they map to exit code 3.
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CompleteArgs {
    std::string image, mask, solver = "tv2", mode = "c2f", out, log, mask_mode = "per-entry";
    double missing_ratio = 0;
    std::uint64_t seed = 0;
    int stages = 3, threads = 0;
    std::optional<double> epsilon0;
    double mu = 1.5;
    std::vector<Index> overlap;
    std::vector<std::string> settings;
};

int run_complete(const CompleteArgs& a) {
    const Tensor truth = load_image(a.image);
    ObservationMask omega(truth.dims());
    if (!a.mask.empty()) {
        omega = read_mask(a.mask).mask;
        if (omega.dims() != truth.dims())
            throw std::invalid_argument("mask shape " + shape_string(omega.dims()) + " does not match image " +
                                        shape_string(truth.dims()));
    } else if (a.missing_ratio > 0) {
        omega = generate_mask(truth.dims(), a.missing_ratio, a.seed, parse_mask_mode(a.mask_mode));
    }

    C2FPlan plan;
    plan.stages = a.stages;
    plan.epsilon0 = a.epsilon0;
    plan.mu = a.mu;
    plan.overlap = a.overlap;
    plan.threads = a.threads;
    plan.seed = a.seed;
    for (const auto& kv : a.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || !apply_solver_setting(plan.solver_config, kv.substr(0, eq), kv.substr(eq + 1)))
            throw std::invalid_argument("bad solver setting '" + kv + "'");
    }
    const RunMode mode = parse_run_mode(a.mode);
    plan.shortcut = mode == RunMode::shortcut;
    plan.validate();
    const auto solver = make_solver(a.solver);

    Tensor y = truth;
    for (Index i = 0; i < y.size(); ++i)
        if (!omega.observed(i)) y.data()[i] = 0;

    const auto t0 = std::chrono::steady_clock::now();
    Tensor restored = y;
    std::vector<StageRecord> records;
    try {
        if (mode == RunMode::pure) {
            restored = solver->complete(y, omega, plan.solver_config).restored;
        } else {
            auto res = run_c2f(y, omega, plan, *solver);
            restored = std::move(res.restored);
            records = std::move(res.stage_records);
        }
    } catch (const std::exception& e) {
        throw SolverFailure(e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    save_image(restored, a.out);
    if (!a.log.empty()) {
        const std::string text = stage_log(records);
        write_bytes_atomic(a.log, std::vector<std::uint8_t>(text.begin(), text.end()));
    }
    for (const auto& rec : records) {
        int n = 0;
        for (auto r : rec.replaced) n += r;
        std::printf("stage %d: epsilon %.4f, replaced %d/%zu\n", rec.stage, rec.epsilon_used, n, rec.replaced.size());
        for (const auto& note : rec.notes) std::printf("  note: %s\n", note.c_str());
    }
    const auto m = evaluate(restored, truth);
    std::printf("%s %s: observed %.4f, PSNR %.4f dB, RSE %.6f, %.2f s\n", solver->name().c_str(), a.mode.c_str(),
                omega.observed_fraction(), m.psnr, m.rse, secs);
    return kOk;
}

int run_experiment_cmd(const std::string& spec_path) {
    const auto spec = load_experiment_spec(spec_path);
    const auto report = run_experiment(spec, [](const ExperimentRow& r) {
        if (r.ok())
            std::printf("%-12s %.2f %-9s %-8s PSNR %8.4f  RSE %.6f  %7.2f s\n", r.image.c_str(), r.ratio, r.solver.c_str(),
                        to_string(r.mode).c_str(), r.psnr, r.rse, r.wall_time);
        else
            std::printf("%-12s %.2f %-9s %-8s FAILED: %s\n", r.image.c_str(), r.ratio, r.solver.c_str(),
                        to_string(r.mode).c_str(), r.error.c_str());
        std::fflush(stdout);
    });
    std::printf("wrote %s\n", (spec.output_dir / "results.csv").string().c_str());
    for (const auto& r : report.rows)
        if (!r.ok()) return kSolver;
    return kOk;
}

int run_rpr(const std::string& image, int stages) {
    const Tensor t = load_image(image);
    std::printf("stage     patches  average_rpr\n");
    for (const auto& rep : rpr_table(t, stages))
        std::printf("%-9s %7zu  %.6f\n", stage_label(rep.stage).c_str(), rep.per_patch_rpr.size(), rep.average_rpr);
    return kOk;
}

int run_mask_gen(const std::vector<Index>& dims, const std::string& image, double ratio, std::uint64_t seed,
                 const std::string& mode, const std::string& out) {
    Shape shape(dims.begin(), dims.end());
    if (!image.empty()) shape = load_image(image).dims();
    if (shape.empty()) throw std::invalid_argument("give --dims or --image");
    const MaskMode m = parse_mask_mode(mode);
    write_mask({generate_mask(shape, ratio, seed, m), seed, ratio, m}, out);
    return kOk;
}

int run_mask_inspect(const std::string& path) {
    const auto f = read_mask(path);
    std::printf("dims          %s\n", shape_string(f.mask.dims()).c_str());
    std::printf("mode          %s\n", to_string(f.mode).c_str());
    std::printf("seed          %llu\n", static_cast<unsigned long long>(f.seed));
    std::printf("missing_ratio %g\n", f.missing_ratio);
    std::printf("observed      %lld of %lld (%.4f)\n", static_cast<long long>(f.mask.count()),
                static_cast<long long>(f.mask.size()), f.mask.observed_fraction());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coarse-to-fine low-rank tensor completion for color images"};
    app.require_subcommand(1);

    CompleteArgs ca;
    auto* complete = app.add_subcommand("complete", "Restore one image");
    complete->add_option("--image", ca.image, "Ground-truth image (PNG or PPM)")->required();
    auto* mask_opt = complete->add_option("--mask", ca.mask, "Mask file");
    complete->add_option("--missing-ratio", ca.missing_ratio, "Fraction of entries to drop")
        ->check(CLI::Range(0.0, 1.0))
        ->excludes(mask_opt);
    complete->add_option("--seed", ca.seed, "Mask and solver seed");
    complete->add_option("--mask-mode", ca.mask_mode, "per-entry or per-pixel");
    complete->add_option("--solver", ca.solver, "tv2 or tracenorm")->capture_default_str();
    complete->add_option("--mode", ca.mode, "pure, c2f or shortcut")->capture_default_str();
    complete->add_option("--stages", ca.stages, "Number of fine stages")->capture_default_str();
    complete->add_option("--epsilon0", ca.epsilon0, "Initial replacement threshold");
    complete->add_option("--mu", ca.mu, "Rank-penalty growth per fine stage")->capture_default_str();
    complete->add_option("--overlap", ca.overlap, "Overlap per fine stage in pixels")->delimiter(',');
    complete->add_option("--threads", ca.threads, "Patch solver threads (0 = all cores)");
    complete->add_option("--set", ca.settings, "Solver setting key=value (repeatable)");
    complete->add_option("--log", ca.log, "Stage log output (JSON lines)");
    complete->add_option("--out", ca.out, "Restored image")->required();

    std::string spec_path;
    auto* experiment = app.add_subcommand("experiment", "Run an experiment grid from a spec file");
    experiment->add_option("--spec", spec_path, "Key-value spec file")->required();

    std::string rpr_image;
    int rpr_stages = 3;
    auto* rpr_cmd = app.add_subcommand("rpr", "Average relative patch rank per stage");
    rpr_cmd->add_option("--image", rpr_image, "Image to analyse")->required();
    rpr_cmd->add_option("--stages", rpr_stages, "Finest stage of the grid")->capture_default_str();

    auto* mask = app.add_subcommand("mask", "Generate or inspect mask files");
    mask->require_subcommand(1);
    std::vector<Index> gen_dims;
    std::string gen_image, gen_mode = "per-entry", gen_out, inspect_path;
    double gen_ratio = 0.9;
    std::uint64_t gen_seed = 0;
    auto* gen = mask->add_subcommand("gen", "Write a seeded random mask");
    auto* dims_opt = gen->add_option("--dims", gen_dims, "Tensor shape, e.g. 256,256,3")->delimiter(',');
    gen->add_option("--image", gen_image, "Take the shape from an image")->excludes(dims_opt);
    gen->add_option("--missing-ratio", gen_ratio, "Fraction of entries to drop")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Sampler seed")->capture_default_str();
    gen->add_option("--mode", gen_mode, "per-entry or per-pixel")->capture_default_str();
    gen->add_option("--out", gen_out, "Mask file to write")->required();
    auto* inspect = mask->add_subcommand("inspect", "Print a mask file header");
    inspect->add_option("file", inspect_path, "Mask file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*complete) return run_complete(ca);
        if (*experiment) return run_experiment_cmd(spec_path);
        if (*rpr_cmd) return run_rpr(rpr_image, rpr_stages);
        if (*gen) return run_mask_gen(gen_dims, gen_image, gen_ratio, gen_seed, gen_mode, gen_out);
        if (*inspect) return run_mask_inspect(inspect_path);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIo;
    } catch (const SolverFailure& e) {
        std::fprintf(stderr, "solver failed: %s\n", e.what());
        return kSolver;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolver;
    }
    return kUsage;
}
