// SPDX-License-Identifier: MIT
#include "c2f/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace c2f {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": not a number: '" + v + "'");
    return x;
}

long long to_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": not an integer: '" + v + "'");
    return x;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        if (!v.empty() && v[0] != '-') x = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": not a seed: '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

std::string fixed(double v, int digits) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string shortest(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_bytes_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

Tensor observed_part(Tensor y, const ObservationMask& omega) {
    for (Index i = 0; i < y.size(); ++i)
        if (!omega.observed(i)) y.data()[i] = 0;
    return y;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunMode parse_run_mode(const std::string& s) {
    if (s == "pure") return RunMode::pure;
    if (s == "c2f") return RunMode::c2f;
    if (s == "shortcut" || s == "short-cut") return RunMode::shortcut;
    throw std::invalid_argument("unknown mode '" + s + "' (expected pure, c2f or shortcut)");
}

std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::pure: return "pure";
        case RunMode::c2f: return "c2f";
        case RunMode::shortcut: return "shortcut";
    }
    return "?";
}

bool apply_solver_setting(SolverConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "lambda1") cfg.lambda1 = to_double(key, value);
    else if (key == "lambda2") cfg.lambda2 = to_double(key, value);
    else if (key == "lambda3") cfg.lambda3 = to_double(key, value);
    else if (key == "rank_weight_scale") cfg.rank_weight_scale = to_double(key, value);
    else if (key == "rho0") cfg.rho0 = to_double(key, value);
    else if (key == "rho_growth") cfg.rho_growth = to_double(key, value);
    else if (key == "rho_max") cfg.rho_max = to_double(key, value);
    else if (key == "tol") cfg.tol = to_double(key, value);
    else if (key == "max_iters") cfg.max_iters = static_cast<int>(to_integer(key, value));
    else if (key == "seed") cfg.seed = to_seed(key, value);
    else if (key == "beta") {
        cfg.beta.clear();
        for (const auto& v : split_list(value)) cfg.beta.push_back(static_cast<int>(to_integer(key, v)));
    } else if (key == "alpha") {
        cfg.alpha.clear();
        for (const auto& v : split_list(value)) cfg.alpha.push_back(to_double(key, v));
    } else
        return false;
    return true;
}

SolverConfig ExperimentSpec::config_for(const std::string& solver) const {
    SolverConfig cfg = plan.solver_config;
    if (auto it = solver_overrides.find(solver); it != solver_overrides.end())
        for (const auto& [k, v] : it->second) apply_solver_setting(cfg, k, v);
    return cfg;
}

void ExperimentSpec::validate() const {
    if (images.empty()) throw std::invalid_argument("experiment: no images given");
    if (missing_ratios.empty() || solvers.empty() || modes.empty())
        throw std::invalid_argument("experiment: ratios, solvers and modes must be nonempty");
    for (double r : missing_ratios)
        if (!(r > 0 && r < 1)) throw std::invalid_argument("experiment: missing ratio must lie in (0, 1)");
    for (const auto& s : solvers) make_solver(s);
    plan.validate();
}

ExperimentSpec parse_experiment_spec(const std::string& text, const std::filesystem::path& base_dir) {
    ExperimentSpec spec;
    std::stringstream in(text);
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "images") {
                spec.images.clear();
                for (const auto& p : split_list(value)) {
                    std::filesystem::path path(p);
                    spec.images.push_back(path.is_relative() && !base_dir.empty() ? base_dir / path : path);
                }
            } else if (key == "missing_ratios") {
                spec.missing_ratios.clear();
                for (const auto& v : split_list(value)) spec.missing_ratios.push_back(to_double(key, v));
            } else if (key == "solvers") {
                spec.solvers = split_list(value);
            } else if (key == "modes") {
                spec.modes.clear();
                for (const auto& v : split_list(value)) spec.modes.push_back(parse_run_mode(v));
            } else if (key == "stages") {
                spec.plan.stages = static_cast<int>(to_integer(key, value));
            } else if (key == "epsilon0") {
                spec.plan.epsilon0 = to_double(key, value);
            } else if (key == "mu") {
                spec.plan.mu = to_double(key, value);
            } else if (key == "overlap") {
                spec.plan.overlap.clear();
                for (const auto& v : split_list(value)) spec.plan.overlap.push_back(to_integer(key, v));
            } else if (key == "threads") {
                spec.plan.threads = static_cast<int>(to_integer(key, value));
            } else if (key == "mask_seed") {
                spec.mask_seed = to_seed(key, value);
            } else if (key == "mask_mode") {
                spec.mask_mode = parse_mask_mode(value);
            } else if (key == "output_dir") {
                std::filesystem::path path(value);
                spec.output_dir = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
            } else if (key == "write_images") {
                spec.write_images = to_bool(key, value);
            } else if (key == "write_rpr") {
                spec.write_rpr = to_bool(key, value);
            } else if (const auto dot = key.find('.'); dot != std::string::npos) {
                const std::string solver = key.substr(0, dot), setting = key.substr(dot + 1);
                SolverConfig probe;
                if (!apply_solver_setting(probe, setting, value)) throw std::invalid_argument("unknown solver setting");
                spec.solver_overrides[solver].emplace_back(setting, value);
            } else if (!apply_solver_setting(spec.plan.solver_config, key, value)) {
                throw std::invalid_argument("unknown key");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + " (" + key + "): " + e.what());
        }
    }
    spec.plan.seed = spec.plan.solver_config.seed;
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    return parse_experiment_spec(std::string(bytes.begin(), bytes.end()), path.parent_path());
}

std::string results_csv(const std::vector<ExperimentRow>& rows) {
    std::string out = "# c2f-results v" + std::to_string(kResultsSchemaVersion) + "\n";
    out += "image,ratio,solver,mode,psnr,rse,wall_time,seed,status\n";
    for (const auto& r : rows) {
        out += csv_field(r.image) + "," + shortest(r.ratio) + "," + csv_field(r.solver) + "," + to_string(r.mode) + ",";
        if (r.ok())
            out += fixed(r.psnr, 6) + "," + fixed(r.rse, 6) + ",";
        else
            out += ",,";
        out += fixed(r.wall_time, 3) + "," + std::to_string(r.seed) + "," + (r.ok() ? "ok" : csv_field("error: " + r.error)) +
               "\n";
    }
    return out;
}

std::string rpr_csv(const std::vector<std::pair<std::string, std::vector<RPRReport>>>& rpr) {
    std::string out = "# c2f-rpr v" + std::to_string(kResultsSchemaVersion) + "\n";
    out += "image,stage,label,patches,average_rpr\n";
    for (const auto& [image, reports] : rpr)
        for (const auto& rep : reports)
            out += csv_field(image) + "," + std::to_string(rep.stage) + "," + stage_label(rep.stage) + "," +
                   std::to_string(rep.per_patch_rpr.size()) + "," + fixed(rep.average_rpr, 6) + "\n";
    return out;
}

std::string stage_log(const std::vector<StageRecord>& records) {
    nlohmann::ordered_json header;
    header["schema"] = "c2f-stage-log";
    header["version"] = kStageLogSchemaVersion;
    std::string out = header.dump() + "\n";
    for (const auto& rec : records)
        for (const auto& line : stage_log_lines(rec)) out += line + "\n";
    return out;
}

std::string cell_name(const ExperimentRow& row) {
    return row.image + "_" + shortest(row.ratio) + "_" + row.solver + "_" + to_string(row.mode);
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const RowCallback& on_row) {
    spec.validate();
    namespace fs = std::filesystem;
    const fs::path out_dir = spec.output_dir;
    std::error_code ec;
    for (const char* sub : {"", "masks", "images", "logs"}) {
        fs::create_directories(out_dir / sub, ec);
        if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
    }

    ExperimentReport report;
    for (const auto& image_path : spec.images) {
        const Tensor truth = load_image(image_path);
        const std::string name = image_path.stem().string();
        if (spec.write_rpr) report.rpr.emplace_back(name, rpr_table(truth, spec.plan.stages));

        for (double ratio : spec.missing_ratios) {
            const ObservationMask omega = generate_mask(truth.dims(), ratio, spec.mask_seed, spec.mask_mode);
            write_mask({omega, spec.mask_seed, ratio, spec.mask_mode},
                       out_dir / "masks" / (name + "_" + shortest(ratio) + ".c2fm"));
            const Tensor y = observed_part(truth, omega);

            for (const auto& solver_name : spec.solvers) {
                const auto solver = make_solver(solver_name);
                C2FPlan plan = spec.plan;
                plan.solver_config = spec.config_for(solver_name);

                std::optional<Tensor> pure;
                std::string pure_error;
                double pure_time = 0;
                auto ensure_pure = [&] {
                    if (pure || !pure_error.empty()) return;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        pure = solver->complete(y, omega, plan.solver_config).restored;
                    } catch (const std::exception& e) {
                        pure_error = e.what();
                    }
                    pure_time = seconds_since(t0);
                };

                for (RunMode mode : spec.modes) {
                    ExperimentRow row;
                    row.image = name;
                    row.ratio = ratio;
                    row.solver = solver->name();
                    row.mode = mode;
                    row.seed = spec.mask_seed;
                    try {
                        ensure_pure();
                        if (!pure) throw std::runtime_error(pure_error);
                        Tensor restored = *pure;
                        double elapsed = pure_time;
                        if (mode != RunMode::pure) {
                            plan.shortcut = mode == RunMode::shortcut;
                            const auto t0 = std::chrono::steady_clock::now();
                            auto res = run_c2f(y, omega, plan, *solver, nullptr, &*pure);
                            elapsed += seconds_since(t0);
                            restored = std::move(res.restored);
                            write_text(out_dir / "logs" / (cell_name(row) + ".jsonl"), stage_log(res.stage_records));
                            report.stages[report.rows.size()] = std::move(res.stage_records);
                        }
                        const auto m = evaluate(restored, truth);
                        row.psnr = m.psnr;
                        row.rse = m.rse;
                        row.wall_time = elapsed;
                        if (spec.write_images) save_image(restored, out_dir / "images" / (cell_name(row) + ".png"));
                    } catch (const IoError&) {
                        throw;
                    } catch (const std::exception& e) {
                        row.error = e.what();
                    }
                    if (on_row) on_row(row);
                    report.rows.push_back(std::move(row));
                }
            }
        }
    }
    write_text(out_dir / "results.csv", results_csv(report.rows));
    if (spec.write_rpr) write_text(out_dir / "rpr.csv", rpr_csv(report.rpr));
    return report;
}

}  // namespace c2f
