#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = d2d::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    const std::string s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / ("d2drobust_cli_" + std::string(info->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string sub(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
};

}  // namespace

TEST_F(CliTest, GenDataRowCountsAndDeterminism) {
    const Outcome a = run({"gen-data", "--out", sub("a"), "--seed", "5", "--set", "n_test=200"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(line_count(dir / "a" / "train.csv"), 1001u);
    EXPECT_EQ(line_count(dir / "a" / "test.csv"), 201u);
    EXPECT_NE(a.out.find("N=1000"), std::string::npos);
    EXPECT_NE(a.out.find("seed="), std::string::npos);
    EXPECT_NE(a.err.find("# effective configuration"), std::string::npos);
    EXPECT_NE(a.err.find("n_test=200"), std::string::npos);

    ASSERT_EQ(run({"gen-data", "--out", sub("b"), "--seed", "5", "--set", "n_test=200"}).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "train.csv"), slurp(dir / "b" / "train.csv"));
    EXPECT_EQ(slurp(dir / "a" / "test.csv"), slurp(dir / "b" / "test.csv"));
}

TEST_F(CliTest, ConfigErrorsNameTheKey) {
    const Outcome bad = run({"gen-data", "--out", sub("x"), "--set", "bandwith_hz=1e7"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("bandwith_hz"), std::string::npos);

    std::ofstream(dir / "run.cfg") << "# comment\nn_train=100\ncolour=blue\n";
    const Outcome file = run({"gen-data", "--config", sub("run.cfg")});
    EXPECT_EQ(file.code, 1);
    EXPECT_NE(file.err.find("colour"), std::string::npos);

    const Outcome malformed = run({"gen-data", "--set", "delta=abc"});
    EXPECT_EQ(malformed.code, 1);
    EXPECT_NE(malformed.err.find("delta"), std::string::npos);

    EXPECT_EQ(run({"teleport"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ConfigFileAndOverrides) {
    std::ofstream(dir / "run.cfg") << "n_train=50\nn_test=300\nseed=9\n";
    const Outcome r = run({"gen-data", "--config", sub("run.cfg"), "--set", "n_train=60", "--out", sub("o")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(dir / "o" / "train.csv"), 61u);
    EXPECT_EQ(line_count(dir / "o" / "test.csv"), 301u);
    EXPECT_NE(r.err.find("seed=9"), std::string::npos);
}

TEST_F(CliTest, FitBoxAndSvc) {
    ASSERT_EQ(run({"gen-data", "--out", sub(""), "--set", "n_test=200"}).code, 0);
    const Outcome box = run({"fit-set", "--out", sub(""), "--method", "box"});
    ASSERT_EQ(box.code, 0) << box.err;
    EXPECT_NE(slurp(dir / "set_BoxSet.txt").find("shape=BoxSet"), std::string::npos);
    EXPECT_NE(box.out.find("size="), std::string::npos);

    const Outcome svc = run({"fit-set", "--out", sub(""), "--method", "svc", "--set", "epsilon=0.05"});
    ASSERT_EQ(svc.code, 0) << svc.err;
    EXPECT_NE(svc.out.find("C=0.02"), std::string::npos) << svc.out;
    EXPECT_NE(svc.out.find("rho="), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "set_SVC.txt"));
}

TEST_F(CliTest, FitMissingDataset) {
    const Outcome r = run({"fit-set", "--method", "l2", "--set", "dataset=" + sub("nope.csv"), "--out", sub("")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("nope.csv"), std::string::npos);
}

TEST_F(CliTest, AllocateBoxHitsCellularCap) {
    ASSERT_EQ(run({"gen-data", "--out", sub(""), "--set", "n_test=200"}).code, 0);
    ASSERT_EQ(run({"fit-set", "--out", sub(""), "--method", "box"}).code, 0);
    const Outcome r = run({"allocate", "--out", sub(""), "--method", "box", "--verbosity", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line, header, row;
    std::size_t trace = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("# iteration", 0) == 0) continue;
        if (line.rfind("# ", 0) == 0) ++trace;
        else if (header.empty()) header = line;
        else row = line;
    }
    EXPECT_EQ(header, "method,epsilon,gamma_min_d,p_c,p_d,feasible,iterations,margin");
    EXPECT_GE(trace, 1u);
    EXPECT_LE(trace, 25u);
    std::vector<std::string> cells;
    std::stringstream ss(row);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 8u);
    EXPECT_EQ(cells[0], "BoxSet");
    EXPECT_EQ(cells[5], "true");
    EXPECT_NEAR(std::stod(cells[3]), 0.1, 1e-4 * 0.1);
}

TEST_F(CliTest, AllocateCollapseExitsWithTwo) {
    ASSERT_EQ(run({"gen-data", "--out", sub(""), "--set", "n_test=200"}).code, 0);
    ASSERT_EQ(run({"fit-set", "--out", sub(""), "--method", "l1"}).code, 0);
    const Outcome r = run({"allocate", "--out", sub(""), "--method", "l1", "--set", "gamma_min_d=1e3"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find(",false,"), std::string::npos);
    EXPECT_NE(r.err.find("feasible=false"), std::string::npos);
}

TEST_F(CliTest, SweepFilesAndCardinality) {
    const std::vector<std::string> args = {
        "sweep", "--out", sub("s"), "--set", "sweep=epsilon", "--set", "grid=0.05,0.06,0.07,0.08,0.09,0.1",
        "--set", "n_train=300", "--set", "n_test=2000"};
    const Outcome r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(line_count(dir / "s" / "metrics.csv"), 37u);
    for (const char* m : {"NonRobust", "L1Ball", "L2Ball", "BoxSet", "SVC", "QuantileSVC"})
        EXPECT_TRUE(fs::exists(dir / "s" / ("cdf_" + std::string(m) + ".csv"))) << m;
    const std::string first = slurp(dir / "s" / "metrics.csv");
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(slurp(dir / "s" / "metrics.csv"), first);
}
