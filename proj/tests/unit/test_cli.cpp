#include "fdrsel/cli.hpp"
#include "fdrsel/csv.hpp"
#include "fdrsel/sorted_l1.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fdrsel;

namespace {

struct CliRun
{
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "fdrsel");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

json load(const fs::path& p)
{
    return json::parse(slurp(p));
}

std::set<std::string> support(const json& j)
{
    std::set<std::string> out;
    for (const auto& s : j["support"]) out.insert(s.get<std::string>());
    return out;
}

class Cli : public ::testing::Test
{
protected:
    static void SetUpTestSuite()
    {
        root_ = fs::temp_directory_path() / "fdrsel_cli_test";
        fs::remove_all(root_);
        ASSERT_EQ(cli({"demo-data", "--out", (root_ / "data").string()}).code, 0);
    }
    static void TearDownTestSuite() { fs::remove_all(root_); }

    static std::string data(const std::string& name) { return (root_ / "data" / name).string(); }
    static std::string dir(const std::string& name) { return (root_ / name).string(); }

    static fs::path root_;
};

fs::path Cli::root_;

} // namespace

TEST_F(Cli, BundledFixturesMatchGenerator)
{
    for (const char* name : {"demo.csv", "noise.csv", "wide.csv"})
        EXPECT_EQ(slurp(fs::path(FDRSEL_SOURCE_DIR) / "data" / name), slurp(data(name))) << name;
}

TEST_F(Cli, SelectFindsTheTwoSignals)
{
    const CliRun r = cli({"select", data("demo.csv"), "--out", dir("sel")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = load(fs::path(dir("sel")) / "selection.json");
    EXPECT_EQ(support(j), (std::set<std::string>{"x1", "x4"}));
    EXPECT_EQ(j["criterion"]["name"], "mbic2");
    EXPECT_FALSE(j["trace"].empty());
    EXPECT_TRUE(j.contains("criterion_value"));

    const auto rows = csv::read_file(fs::path(dir("sel")) / "coefficients.csv");
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[1][0], "(intercept)");
    double b = 0.0;
    ASSERT_TRUE(csv::parse_double(rows[2][1], b));
    EXPECT_EQ(b, j["coefficients"]["x1"].get<double>());
}

TEST_F(Cli, AicSelectsASuperset)
{
    ASSERT_EQ(cli({"select", data("demo.csv"), "--out", dir("sel2")}).code, 0);
    ASSERT_EQ(cli({"select", data("demo.csv"), "--criterion", "aic", "--out", dir("aic")}).code, 0);
    const auto strict = support(load(fs::path(dir("sel2")) / "selection.json"));
    const auto loose = support(load(fs::path(dir("aic")) / "selection.json"));
    for (const auto& s : strict) EXPECT_TRUE(loose.count(s)) << s;
}

TEST_F(Cli, NoiseGivesEmptyModel)
{
    ASSERT_EQ(cli({"select", data("noise.csv"), "--criterion", "mbic", "--out", dir("noise")}).code, 0);
    EXPECT_TRUE(load(fs::path(dir("noise")) / "selection.json")["support"].empty());
}

TEST_F(Cli, SelectIsIdempotent)
{
    ASSERT_EQ(cli({"select", data("wide.csv"), "--out", dir("idem1")}).code, 0);
    ASSERT_EQ(cli({"select", data("wide.csv"), "--out", dir("idem2")}).code, 0);
    EXPECT_EQ(slurp(fs::path(dir("idem1")) / "selection.json"), slurp(fs::path(dir("idem2")) / "selection.json"));
    EXPECT_EQ(slurp(fs::path(dir("idem1")) / "coefficients.csv"), slurp(fs::path(dir("idem2")) / "coefficients.csv"));
}

TEST_F(Cli, CustomPlan)
{
    const CliRun r = cli({"select", data("demo.csv"), "--plan", "forward(bic),stepwise(mbic)", "--out", dir("plan")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load(fs::path(dir("plan")) / "selection.json")["plan"], "forward(bic),stepwise(mbic)");
}

TEST_F(Cli, ExitCodes)
{
    EXPECT_EQ(cli({"select", data("demo.csv"), "--response", "nope", "--out", dir("x")}).code, exit_data);
    EXPECT_EQ(cli({"select", dir("missing.csv"), "--out", dir("x")}).code, exit_data);
    EXPECT_EQ(cli({"select", data("demo.csv"), "--criterion", "xyz", "--out", dir("x")}).code, exit_usage);
    EXPECT_EQ(cli({"slope", data("demo.csv"), "--cv", "--rule", "bh", "--out", dir("x")}).code, exit_usage);
    EXPECT_EQ(cli({"lasso", data("demo.csv"), "--cv", "--lambda", "1", "--out", dir("x")}).code, exit_usage);
    EXPECT_EQ(cli({"frobnicate"}).code, exit_usage);
    const CliRun err = cli({"select", data("demo.csv"), "--response", "nope", "--out", dir("x")});
    EXPECT_NE(err.err.find("nope"), std::string::npos);
}

TEST_F(Cli, SlopeWritesReadableTables)
{
    const CliRun r = cli({"slope", data("demo.csv"), "--rule", "bh", "--q", "0.1", "--path", "8", "--out", dir("slope")});
    ASSERT_EQ(r.code, 0) << r.err;
    const fs::path d(dir("slope"));
    const json j = load(d / "fit.json");
    EXPECT_LE(j["kkt"].get<double>(), 1e-6);
    EXPECT_TRUE(support(j).count("x1"));
    const auto path = csv::read_numeric_table(d / "path.csv");
    ASSERT_EQ(path.rows.size(), 8u);
    EXPECT_EQ(path.rows.front()[path.column("nonzero")], 0.0);
    for (const auto& row : path.rows) EXPECT_LE(row[path.column("clusters")], row[path.column("nonzero")]);
    EXPECT_EQ(read_lambda_csv(d / "lambda.csv").size(), 10);
}

TEST_F(Cli, LassoCvAndSeedFromEnvironment)
{
    ::setenv("FDRSEL_SEED", "77", 1);
    const CliRun r = cli({"lasso", data("demo.csv"), "--cv", "--threads", "1", "--out", dir("lasso")});
    ::unsetenv("FDRSEL_SEED");
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = load(fs::path(dir("lasso")) / "fit.json");
    EXPECT_EQ(j["cv"]["seed"], 77);
    EXPECT_TRUE(support(j).count("x1"));
    EXPECT_TRUE(fs::exists(fs::path(dir("lasso")) / "cv.csv"));
    const auto path = csv::read_numeric_table(fs::path(dir("lasso")) / "path.csv");
    EXPECT_GT(path.rows.size(), 10u);
}

TEST_F(Cli, ThresholdReducesLassoSupport)
{
    ASSERT_EQ(cli({"lasso", data("wide.csv"), "--cv", "--threads", "1", "--out", dir("wl")}).code, 0);
    const CliRun r = cli({"threshold", dir("wl") + "/fit.json", data("wide.csv"), "--out", dir("wt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = load(fs::path(dir("wt")) / "threshold.json");
    const auto before = support(load(fs::path(dir("wl")) / "fit.json"));
    const auto after = support(j);
    for (const auto& s : after) EXPECT_TRUE(before.count(s));
    EXPECT_LE(j["criterion_value"].get<double>(), j["input_criterion_value"].get<double>());
    EXPECT_EQ(j["criterion"]["p_total"], 50);
}

TEST_F(Cli, ThresholdFixedPointAndEmpty)
{
    ASSERT_EQ(cli({"select", data("demo.csv"), "--out", dir("fp")}).code, 0);
    ASSERT_EQ(cli({"threshold", dir("fp") + "/selection.json", data("demo.csv"), "--out", dir("fp2")}).code, 0);
    EXPECT_EQ(support(load(fs::path(dir("fp2")) / "threshold.json")), (std::set<std::string>{"x1", "x4"}));

    const fs::path empty = fs::path(dir("empty.json"));
    std::ofstream(empty) << R"({"support": []})";
    ASSERT_EQ(cli({"threshold", empty.string(), data("demo.csv"), "--out", dir("fp3")}).code, 0);
    EXPECT_TRUE(load(fs::path(dir("fp3")) / "threshold.json")["support"].empty());
}

TEST_F(Cli, KnockoffWritesStatistics)
{
    const fs::path sigma = fs::path(dir("sigma.csv"));
    {
        csv::NumericTable t;
        for (int j = 1; j <= 10; ++j) t.header.push_back("x" + std::to_string(j));
        for (int i = 0; i < 10; ++i) {
            t.rows.emplace_back(10, 0.0);
            t.rows.back()[static_cast<std::size_t>(i)] = 1.0;
        }
        csv::write_numeric_table(sigma, t);
    }
    const CliRun r = cli({"knockoff", data("demo.csv"), "--sigma", sigma.string(), "--q", "0.5", "--threads", "1",
                       "--out", dir("ko")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = load(fs::path(dir("ko")) / "knockoff.json");
    EXPECT_EQ(j["W"].size(), 10u);
    EXPECT_EQ(csv::read_file(fs::path(dir("ko")) / "w.csv").size(), 11u);

    const fs::path bad = fs::path(dir("bad.csv"));
    std::ofstream(bad) << "a,b\n1,2\n2,1\n";
    EXPECT_EQ(cli({"knockoff", data("demo.csv"), "--sigma", bad.string(), "--out", dir("ko2")}).code, exit_data);
}

TEST_F(Cli, SimulateWritesReports)
{
    const CliRun r = cli({"simulate", "scenario1", "--replicates", "3", "--n", "200", "--methods", "bic;mbic2",
                       "--threads", "1", "--out", dir("sim")});
    ASSERT_EQ(r.code, 0) << r.err;
    const fs::path d(dir("sim"));
    EXPECT_EQ(csv::read_file(d / "scenario1_records.csv").size(), 1u + 3u * 2u);
    EXPECT_EQ(csv::read_file(d / "scenario1_summary.csv").size(), 3u);
    EXPECT_TRUE(fs::exists(d / "long.csv"));
    EXPECT_TRUE(fs::exists(d / "run.log"));
    EXPECT_EQ(cli({"simulate", "no-such-scenario", "--out", dir("sim2")}).code, exit_usage);
}
