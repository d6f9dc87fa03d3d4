#include "coclust/io.hpp"
#include "coclust/simulate.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace coclust;
namespace fs = std::filesystem;

namespace {

class TempDir {
  public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                (std::string("coclust_io_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = (path_ / name).string();
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }
    std::string path(const std::string& name) const { return (path_ / name).string(); }

  private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(LoadDataset, SmallExample) {
    TempDir dir;
    const auto ds = io::load_dataset(dir.file("x.csv", "0,1\n1,0\n"), dir.file("y.csv", "0.5\n-0.5\n"));
    EXPECT_EQ(ds.x.rows(), 2);
    EXPECT_EQ(ds.x.cols(), 2);
    EXPECT_EQ(ds.y.dim(), 1);
    EXPECT_EQ(ds.x(0, 1), 1.0);
    EXPECT_EQ(ds.y.raw()(1, 0), -0.5);
}

TEST(LoadDataset, MissingCovariatesMeanInterceptOnly) {
    TempDir dir;
    const auto ds = io::load_dataset(dir.file("x.csv", "0,1,1\n1,0,0\n"), "");
    EXPECT_EQ(ds.y.dim(), 0);
    EXPECT_EQ(ds.y.augmented(), Matrix::Ones(2, 1));
}

TEST(LoadDataset, RowCountMismatch) {
    TempDir dir;
    EXPECT_THROW(io::load_dataset(dir.file("x.csv", "0,1\n1,0\n"), dir.file("y.csv", "1\n2\n3\n")),
                 DimensionMismatch);
}

TEST(LoadDataset, NonBinaryEntryNamesTheCell) {
    TempDir dir;
    const auto x = dir.file("x.csv", "0,1\n1,2\n");
    try {
        io::read_binary_csv(x);
        FAIL() << "expected NonBinaryValue";
    } catch (const NonBinaryValue& e) {
        EXPECT_EQ(e.row, 1u);
        EXPECT_EQ(e.col, 1u);
        EXPECT_NE(std::string(e.what()).find("'2'"), std::string::npos);
    }
}

TEST(LoadDataset, ParseErrorsCarryLineAndColumn) {
    TempDir dir;
    try {
        io::read_binary_csv(dir.file("x.csv", "0,1\n1,abc\n"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2u);
        EXPECT_EQ(e.column, 2u);
    }
    EXPECT_THROW(io::read_binary_csv(dir.file("ragged.csv", "0,1\n1\n")), ParseError);
    EXPECT_THROW(io::read_covariate_csv(dir.file("y.csv", "0.5\nnan\n")), ParseError);
    EXPECT_THROW(io::read_covariate_csv(dir.file("y2.csv", "0.5,1\n1x,2\n")), ParseError);
    EXPECT_THROW(io::read_binary_csv(dir.path("missing.csv")), ParseError);
    EXPECT_THROW(io::read_binary_csv(dir.file("empty.csv", "")), ParseError);
}

TEST(Csv, EmittedFilesReparseToIdenticalObjects) {
    TempDir dir;
    std::mt19937_64 rng(1);
    const auto inst = test::random_instance(13, 7, 3, rng);
    io::write_text(dir.path("x.csv"), io::binary_csv(inst.x));
    io::write_text(dir.path("y.csv"), io::covariate_csv(inst.y));
    const auto ds = io::load_dataset(dir.path("x.csv"), dir.path("y.csv"));
    EXPECT_EQ(ds.x, inst.x);
    EXPECT_EQ(ds.y, inst.y);
}

TEST(Csv, LabelsRoundTripOneBased) {
    TempDir dir;
    const HardLabels h{{0, 2, 1}, {1, 0}};
    const std::string text = io::labels_csv(h);
    EXPECT_EQ(text, "axis,index,label\nrow,1,1\nrow,2,3\nrow,3,2\ncol,1,2\ncol,2,1\n");
    io::write_text(dir.path("labels.csv"), text);
    EXPECT_EQ(io::parse_labels_csv(dir.path("labels.csv")), h);
}

TEST(Csv, FreeEnergyTraceUsesSeventeenDigits) {
    EXPECT_EQ(io::free_energy_csv({-1.0 / 3.0, 2.5}),
              "iteration,value\n0,-0.33333333333333331\n1,2.5\n");
}

TEST(ParamsJson, SerializeParseSerializeIsByteIdentical) {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        const auto th = test::random_params(1 + rep % 3, 1 + rep % 2, rep % 3, rng);
        const std::string first = io::dump(io::params_to_json(th));
        const ModelParams back = io::params_from_json(io::Json::parse(first));
        EXPECT_EQ(io::dump(io::params_to_json(back)), first);
        EXPECT_EQ(back.pi, th.pi);
        EXPECT_EQ(back.gaussians[0].covariance(), th.gaussians[0].covariance());
    }
}

TEST(ParamsJson, ValidationErrorsNameTheInvariant) {
    std::mt19937_64 rng(3);
    io::Json j = io::params_to_json(test::random_params(2, 2, 1, rng));
    j["pi"] = {0.7, 0.7};
    try {
        io::params_from_json(j);
        FAIL() << "expected ParamValidationError";
    } catch (const ParamValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("pi"), std::string::npos);
    }
    j = io::params_to_json(test::random_params(2, 2, 1, rng));
    j.erase("beta");
    EXPECT_THROW(io::params_from_json(j), ParamValidationError);
}

TEST(Examples, SimulatedFilesLoad) {
    TempDir dir;
    const auto sim = generate({20, 6, separated_design(2, 2, 1, 4), 5});
    io::write_text(dir.path("x.csv"), io::binary_csv(sim.x));
    io::write_text(dir.path("y.csv"), io::covariate_csv(sim.y));
    const std::string first = slurp(dir.path("x.csv"));
    const auto ds = io::load_dataset(dir.path("x.csv"), dir.path("y.csv"));
    EXPECT_EQ(io::binary_csv(ds.x), first);
}
