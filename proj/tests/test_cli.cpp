#include "coclust/io.hpp"
#include "coclust/simulate.hpp"

#include "cli_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace coclust;
namespace fs = std::filesystem;
using test::run_cli;

namespace {

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::temp_directory_path() / (std::string("coclust_cli_") + info->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    std::string dir(const std::string& name) const { return (root_ / name).string(); }

    std::string write_params(const ModelParams& th) const {
        const auto p = dir("params.json");
        io::write_text(p, io::dump(io::params_to_json(th)));
        return p;
    }

    fs::path root_;
};

ModelParams one_block() {
    ModelParams th;
    th.pi = Vector::Ones(1);
    th.rho = Vector::Ones(1);
    th.beta = BetaBlocks(1, 1, 2);
    th.beta(0, 0) << 0.2, 0.5;
    th.gaussians.emplace_back(Vector::Zero(1), Matrix::Identity(1, 1));
    return th;
}

} // namespace

TEST_F(CliTest, SimulateWritesLoadableFiles) {
    const auto params = write_params(one_block());
    const auto r = run_cli(dir("scratch"), {"simulate", "--params", params, "--n", "12", "--m", "5",
                                            "--seed", "3", "--out", dir("sim")});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto ds = io::load_dataset(dir("sim/x.csv"), dir("sim/y.csv"));
    EXPECT_EQ(ds.x.rows(), 12);
    EXPECT_EQ(ds.x.cols(), 5);
    EXPECT_EQ(ds.y.dim(), 1);
    const HardLabels truth = io::parse_labels_csv(dir("sim/truth_labels.csv"));
    EXPECT_EQ(truth.z.size(), 12u);
    EXPECT_EQ(truth.w.size(), 5u);
    EXPECT_TRUE(fs::exists(dir("sim/manifest.json")));
}

TEST_F(CliTest, SeedChangesDataButNotShapes) {
    const auto params = write_params(separated_design(2, 2, 1, 1));
    ASSERT_EQ(run_cli(dir("s"), {"simulate", "--params", params, "--n", "30", "--m", "10", "--seed", "1",
                                 "--out", dir("a")}).exit_code, 0);
    ASSERT_EQ(run_cli(dir("s"), {"simulate", "--params", params, "--n", "30", "--m", "10", "--seed", "2",
                                 "--out", dir("b")}).exit_code, 0);
    EXPECT_NE(test::slurp(dir("a/x.csv")), test::slurp(dir("b/x.csv")));
    const auto a = io::load_dataset(dir("a/x.csv"), dir("a/y.csv"));
    const auto b = io::load_dataset(dir("b/x.csv"), dir("b/y.csv"));
    EXPECT_EQ(a.x.rows(), b.x.rows());
    EXPECT_EQ(a.x.cols(), b.x.cols());
}

TEST_F(CliTest, EveryCommandIsByteDeterministic) {
    const auto params = write_params(separated_design(2, 2, 1, 2));
    for (const char* out : {"r1", "r2"}) {
        const std::string base = dir(out);
        ASSERT_EQ(run_cli(dir("s"), {"simulate", "--params", params, "--n", "40", "--m", "12", "--seed",
                                     "5", "--out", base + "/sim"}).exit_code, 0);
        const std::string x = base + "/sim/x.csv", y = base + "/sim/y.csv";
        ASSERT_EQ(run_cli(dir("s"), {"fit", "--x", x, "--y", y, "--g", "2", "--d", "2", "--seed", "9",
                                     "--restarts", "3", "--out", base + "/fit"}).exit_code, 0);
        ASSERT_EQ(run_cli(dir("s"), {"select", "--x", x, "--y", y, "--g-range", "1:2", "--d-range", "1:2",
                                     "--seed", "9", "--restarts", "2", "--out", base + "/select"}).exit_code, 0);
        ASSERT_EQ(run_cli(dir("s"), {"influence", "--x", x, "--y", y, "--g", "2", "--d", "2", "--seed", "9",
                                     "--restarts", "2", "--out", base + "/influence"}).exit_code, 0);
    }
    for (const char* sub : {"sim", "fit", "select", "influence"}) {
        const auto a = test::directory_contents(dir(std::string("r1/") + sub));
        const auto b = test::directory_contents(dir(std::string("r2/") + sub));
        ASSERT_FALSE(a.empty());
        ASSERT_EQ(a.size(), b.size()) << sub;
        for (const auto& [name, bytes] : a) {
            if (name == "manifest.json")
                continue; // echoes the differing output paths
            EXPECT_EQ(bytes, b.at(name)) << sub << "/" << name;
        }
    }
    for (const char* f : {"labels.csv", "params.json", "free_energy.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir(std::string("r1/fit/") + f))) << f;
    EXPECT_TRUE(fs::exists(dir("r1/influence/influence.csv")));
}

TEST_F(CliTest, RerunIntoSameDirectoryIsByteIdentical) {
    const auto params = write_params(separated_design(2, 2, 1, 3));
    ASSERT_EQ(run_cli(dir("s"), {"simulate", "--params", params, "--n", "30", "--m", "10", "--out",
                                 dir("sim")}).exit_code, 0);
    const auto run = [&] {
        EXPECT_EQ(run_cli(dir("s"), {"fit", "--x", dir("sim/x.csv"), "--y", dir("sim/y.csv"), "--seed",
                                     "4", "--restarts", "2", "--out", dir("fit")}).exit_code, 0);
        return test::directory_contents(dir("fit"));
    };
    const auto first = run();
    EXPECT_EQ(run(), first);
}

TEST_F(CliTest, SelectOnOneBlockDataWritesFourRows) {
    const auto params = write_params(one_block());
    ASSERT_EQ(run_cli(dir("s"), {"simulate", "--params", params, "--n", "60", "--m", "15", "--out",
                                 dir("sim")}).exit_code, 0);
    const auto r = run_cli(dir("s"), {"select", "--x", dir("sim/x.csv"), "--y", dir("sim/y.csv"),
                                      "--g-range", "1:2", "--d-range", "1:2", "--restarts", "2",
                                      "--out", dir("sel")});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream grid(test::slurp(dir("sel/bic_grid.csv")));
    std::string line;
    std::getline(grid, line);
    EXPECT_EQ(line, "g,d,bic,converged");
    int rows = 0;
    while (std::getline(grid, line))
        ++rows;
    EXPECT_EQ(rows, 4);
    EXPECT_NE(r.out.find("best g="), std::string::npos);
}

TEST_F(CliTest, RoundTripRecoversRows) {
    const auto params = write_params(separated_design(2, 2, 1, 4, {.scheme = InterceptScheme::DistinctSigns}));
    ASSERT_EQ(run_cli(dir("s"), {"simulate", "--params", params, "--n", "200", "--m", "30", "--seed",
                                 "8", "--out", dir("sim")}).exit_code, 0);
    ASSERT_EQ(run_cli(dir("s"), {"fit", "--x", dir("sim/x.csv"), "--y", dir("sim/y.csv"), "--g", "2",
                                 "--d", "2", "--restarts", "10", "--out", dir("fit")}).exit_code, 0);
    const HardLabels truth = io::parse_labels_csv(dir("sim/truth_labels.csv"));
    const HardLabels est = io::parse_labels_csv(dir("fit/labels.csv"));
    EXPECT_LE(label_error_rate(est.z, truth.z), 0.1);
}

TEST_F(CliTest, ErrorsExitNonzeroWithOneLineDiagnostic) {
    io::write_text(dir("bad.csv"), "0,1\n1,2\n");
    auto r = run_cli(dir("s"), {"fit", "--x", dir("bad.csv"), "--g", "1", "--d", "1", "--out", dir("o")});
    EXPECT_NE(r.exit_code, 0);
    EXPECT_EQ(r.err.rfind("error: NonBinaryValue:", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

    io::write_text(dir("x.csv"), "0,1\n1,0\n");
    io::write_text(dir("y.csv"), "1\n2\n3\n");
    r = run_cli(dir("s"), {"fit", "--x", dir("x.csv"), "--y", dir("y.csv"), "--g", "1", "--d", "1",
                           "--out", dir("o")});
    EXPECT_NE(r.exit_code, 0);
    EXPECT_EQ(r.err.rfind("error: DimensionMismatch:", 0), 0u) << r.err;

    io::write_text(dir("p.json"), R"({"g": 1, "d": 1, "p": 0, "pi": [0.5], "rho": [1.0]})");
    r = run_cli(dir("s"), {"simulate", "--params", dir("p.json"), "--n", "3", "--m", "2", "--out", dir("o")});
    EXPECT_NE(r.exit_code, 0);
    EXPECT_EQ(r.err.rfind("error: ParamValidationError:", 0), 0u) << r.err;

    r = run_cli(dir("s"), {"fit", "--x", dir("missing.csv")});
    EXPECT_NE(r.exit_code, 0);
    r = run_cli(dir("s"), {"select", "--x", dir("x.csv"), "--g-range", "3:1"});
    EXPECT_NE(r.exit_code, 0);
}

TEST_F(CliTest, BenchmarkWritesTimingTables) {
    const auto r = run_cli(dir("s"), {"benchmark", "--n-list", "100,200,300", "--m", "20", "--d-list", "2",
                                      "--iters", "3", "--reps", "1", "--out", dir("bench")});
    ASSERT_EQ(r.exit_code, 0) << r.err;
    std::istringstream in(test::slurp(dir("bench/timing.csv")));
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 4);
    EXPECT_TRUE(fs::exists(dir("bench/timing_trend.csv")));
}
