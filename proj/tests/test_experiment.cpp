// SPDX-License-Identifier: MIT
#include "c2f/experiment.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

namespace c2f {
namespace {

namespace fs = std::filesystem;

class ExperimentTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("c2f_exp_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        Tensor img({24, 24, 3});
        for (Index i = 0; i < 24; ++i)
            for (Index j = 0; j < 24; ++j)
                for (Index c = 0; c < 3; ++c) img(i, j, c) = std::round(255 * (0.4 + 0.3 * std::sin(0.3 * i + 0.2 * j + c))) / 255;
        save_image(img, dir_ / "wave.png");
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string read_text(const fs::path& p) {
        const auto b = read_bytes(p);
        return {b.begin(), b.end()};
    }

    fs::path dir_;
};

// Drops the wall_time column (7th) from every data row.
std::string without_timing(const std::string& csv) {
    std::stringstream in(csv);
    std::string out;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') {
            out += line + "\n";
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        if (cells.size() > 6) cells.erase(cells.begin() + 6);
        for (const auto& c : cells) out += c + ",";
        out += "\n";
    }
    return out;
}

const char* kSpec = R"(# small grid
images = wave.png
missing_ratios = 0.5, 0.7
solvers = tracenorm, tv2
modes = pure, c2f, shortcut
stages = 2
overlap = 2, 1
mask_seed = 11
output_dir = out
max_iters = 25
rho0 = 0.05
rho_growth = 1.1
tv2.lambda2 = 2
threads = 2
)";

TEST_F(ExperimentTest, ParsesKeysAndOverrides) {
    const auto spec = parse_experiment_spec(kSpec, dir_);
    ASSERT_EQ(spec.images.size(), 1u);
    EXPECT_EQ(spec.images[0], dir_ / "wave.png");
    EXPECT_EQ(spec.missing_ratios, (std::vector<double>{0.5, 0.7}));
    EXPECT_EQ(spec.modes.size(), 3u);
    EXPECT_EQ(spec.plan.stages, 2);
    EXPECT_EQ(spec.plan.overlap, (std::vector<Index>{2, 1}));
    EXPECT_EQ(spec.mask_seed, 11u);
    EXPECT_EQ(spec.output_dir, dir_ / "out");
    EXPECT_EQ(spec.config_for("tracenorm").lambda2, SolverConfig{}.lambda2);
    EXPECT_EQ(spec.config_for("tv2").lambda2, 2.0);
    EXPECT_EQ(spec.config_for("tv2").max_iters, 25);

    EXPECT_THROW(parse_experiment_spec("bogus = 1"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_spec("stages 3"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_spec("mu = fast"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_spec("tv2.nothing = 1"), std::invalid_argument);
    EXPECT_THROW(parse_experiment_spec("modes = pure, best"), std::invalid_argument);
}

TEST_F(ExperimentTest, WritesReportsAndIsDeterministic) {
    auto spec = parse_experiment_spec(kSpec, dir_);
    const auto first = run_experiment(spec);
    ASSERT_EQ(first.rows.size(), 2u * 2u * 3u);
    for (const auto& r : first.rows) {
        EXPECT_TRUE(r.ok()) << r.error;
        EXPECT_TRUE(std::isfinite(r.psnr));
        EXPECT_EQ(r.seed, 11u);
    }
    const fs::path out = dir_ / "out";
    const std::string csv1 = read_text(out / "results.csv");
    EXPECT_EQ(csv1.rfind("# c2f-results v1\nimage,ratio,solver,mode,psnr,rse,wall_time,seed,status\n", 0), 0u);
    EXPECT_TRUE(fs::exists(out / "rpr.csv"));
    EXPECT_TRUE(fs::exists(out / "masks" / "wave_0.7.c2fm"));
    EXPECT_TRUE(fs::exists(out / "images" / "wave_0.7_tv2_c2f.png"));
    const std::string log = read_text(out / "logs" / "wave_0.5_tracenorm_c2f.jsonl");
    EXPECT_EQ(log.rfind("{\"schema\":\"c2f-stage-log\",\"version\":1}\n", 0), 0u);
    EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1 + 4 + 16);

    // the mask on disk is the one every solver and mode used
    EXPECT_EQ(read_mask(out / "masks" / "wave_0.5.c2fm").mask, generate_mask({24, 24, 3}, 0.5, 11));

    run_experiment(spec);
    EXPECT_EQ(without_timing(read_text(out / "results.csv")), without_timing(csv1));
}

TEST_F(ExperimentTest, PureRowMatchesDirectSolve) {
    auto spec = parse_experiment_spec(kSpec, dir_);
    spec.modes = {RunMode::pure};
    spec.solvers = {"tracenorm"};
    spec.missing_ratios = {0.5};
    const auto rep = run_experiment(spec);
    const Tensor truth = load_image(dir_ / "wave.png");
    const auto omega = generate_mask(truth.dims(), 0.5, 11);
    const auto direct = complete_tracenorm(test::zero_unobserved(truth, omega), omega, spec.config_for("tracenorm"));
    EXPECT_EQ(rep.rows[0].psnr, psnr(direct.restored, truth));
}

TEST_F(ExperimentTest, FullyObservedLimitGivesInfinitePsnr) {
    auto spec = parse_experiment_spec(kSpec, dir_);
    spec.missing_ratios = {1e-9};
    spec.modes = {RunMode::pure};
    const auto rep = run_experiment(spec);
    for (const auto& r : rep.rows) {
        EXPECT_TRUE(std::isinf(r.psnr));
        EXPECT_EQ(r.rse, 0.0);
    }
    EXPECT_NE(read_text(dir_ / "out" / "results.csv").find(",inf,0.000000,"), std::string::npos);
}

TEST_F(ExperimentTest, FailuresAreRecordedPerRow) {
    Tensor tiny = Tensor::constant({4, 4, 3}, 0.5);
    save_image(tiny, dir_ / "tiny.png");
    auto spec = parse_experiment_spec(kSpec, dir_);
    spec.images = {dir_ / "tiny.png", dir_ / "wave.png"};
    spec.plan.stages = 3;  // an 8x8 grid does not fit a 4x4 image
    spec.write_rpr = false;
    spec.solvers = {"tracenorm"};
    spec.missing_ratios = {0.5};
    const auto rep = run_experiment(spec);
    ASSERT_EQ(rep.rows.size(), 6u);
    EXPECT_TRUE(rep.rows[0].ok());
    EXPECT_FALSE(rep.rows[1].ok());
    EXPECT_FALSE(rep.rows[2].ok());
    EXPECT_TRUE(rep.rows[4].ok());
    const std::string csv = read_text(dir_ / "out" / "results.csv");
    EXPECT_NE(csv.find("error: "), std::string::npos);
}

TEST(ExperimentSpecFile, BundledBenchmarkSpecLoads) {
    const auto spec = load_experiment_spec(fs::path(C2F_DATA_DIR) / "specs" / "benchmark.spec");
    EXPECT_EQ(spec.images.size(), 8u);
    for (const auto& p : spec.images) EXPECT_TRUE(fs::exists(p)) << p;
    EXPECT_EQ(spec.config_for("tv2").rho0, 0.1);
    EXPECT_EQ(spec.config_for("tracenorm").rho0, SolverConfig{}.rho0);
}

TEST_F(ExperimentTest, MissingImageIsAnIoError) {
    auto spec = parse_experiment_spec(kSpec, dir_);
    spec.images = {dir_ / "nope.png"};
    EXPECT_THROW(run_experiment(spec), IoError);
    EXPECT_THROW(load_experiment_spec(dir_ / "nope.spec"), IoError);
}

}  // namespace
}  // namespace c2f
