#include "test_support.hpp"

#include "mixlogit/cli.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <sstream>

using namespace mixlogit;
using namespace mixlogit::testing;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "mixlogit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json load_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

/// Simulated paper_cmnl data with 60 respondents, shared across the tests.
const std::string& small_data()
{
    static TempDir dir;
    static const std::string path = [] {
        const auto r = run({"--out-dir", dir.path(), "--seed", "3", "simulate", "--spec", "paper_cmnl", "--n", "60"});
        EXPECT_EQ(r.code, 0) << r.err;
        return dir.file("synth.csv");
    }();
    return path;
}

} // namespace

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"estimate", "--spec", "paper_cmnl"}).code, 2);
    EXPECT_EQ(run({"simulate", "--design", "latin"}).code, 2);
    TempDir dir;
    const auto r = run({"--out-dir", dir.path(), "estimate", "--data", dir.file("none.csv"), "--spec", "paper_cmnl"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
    write_text(dir.file("bad.spec"), "model = CMNL\n[coefficients]\nx: attribute=h_nope\n");
    EXPECT_EQ(run({"--out-dir", dir.path(), "estimate", "--data", small_data(), "--spec", dir.file("bad.spec")}).code, 2);
}

TEST(Cli, SimulateWritesDataTruthAndManifest)
{
    TempDir dir;
    const auto r = run({"--out-dir", dir.path(), "--seed", "9", "simulate", "--spec", "paper_ecmnl", "--n", "25",
                        "--design", "random"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto data = load_choice_data(dir.file("synth.csv"));
    EXPECT_EQ(data.num_respondents(), 25u);
    EXPECT_EQ(data.num_tasks(), 200u);
    const auto truth = load_json(dir.file("truth.json"));
    EXPECT_EQ(truth_theta(load_spec("paper_ecmnl"), truth_from_json(truth)), reference_theta(load_spec("paper_ecmnl")));
    const auto m = load_json(dir.file("simulate_manifest.json"));
    EXPECT_EQ(m["command"], "simulate");
    EXPECT_EQ(m["seeds"]["population"], 9);
    EXPECT_EQ(m["seeds"]["choices"], 11);
    EXPECT_EQ(m["outputs"].size(), 2u);

    // Replaying the recorded arguments reproduces the data bitwise.
    std::vector<std::string> args = m["arguments"].get<std::vector<std::string>>();
    TempDir again;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--out-dir") args[i + 1] = again.path();
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(read_file(again.file("synth.csv")), read_file(dir.file("synth.csv")));
}

TEST(Cli, FixedModelForcesSingleDraw)
{
    TempDir dir;
    const auto r = run({"--out-dir", dir.path(), "estimate", "--data", small_data(), "--spec", "paper_cmnl", "--draws", "64"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("using 1 draw"), std::string::npos);
    const auto j = load_json(dir.file("paper_cmnl_result.json"));
    EXPECT_EQ(j["draws"]["count"], 1);
    EXPECT_EQ(j["parameters"].size(), 27u);
    EXPECT_EQ(j["convergence"]["status"], "converged");
    EXPECT_EQ(j["data_hash"], fnv1a_hex(read_file(small_data())));
    const auto m = load_json(dir.file("estimate_manifest.json"));
    EXPECT_EQ(m["input_hashes"][small_data()], j["data_hash"]);
    EXPECT_NE(r.out.find("| rooms |"), std::string::npos);
}

TEST(Cli, ThreadCountLeavesResultBitwiseIdentical)
{
    TempDir a, b;
    const std::vector<std::string> common = {"estimate", "--data", small_data(), "--spec", "paper_ecmnl", "--draws", "16",
                                             "--kr-draws", "1000"};
    auto args_a = std::vector<std::string>{"--out-dir", a.path(), "--threads", "1", "--seed", "5"};
    auto args_b = std::vector<std::string>{"--out-dir", b.path(), "--threads", "3", "--seed", "5"};
    args_a.insert(args_a.end(), common.begin(), common.end());
    args_b.insert(args_b.end(), common.begin(), common.end());
    const auto ra = run(args_a), rb = run(args_b);
    EXPECT_EQ(ra.code, rb.code);
    ASSERT_TRUE(std::filesystem::exists(a.file("paper_ecmnl_result.json")));
    EXPECT_EQ(read_file(a.file("paper_ecmnl_result.json")), read_file(b.file("paper_ecmnl_result.json")));
}

TEST(Cli, NonConvergenceExitsWithThree)
{
    TempDir dir;
    const auto r = run({"--out-dir", dir.path(), "estimate", "--data", small_data(), "--spec", "paper_cmnl", "--max-iter",
                        "2", "--no-covariance"});
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(std::filesystem::exists(dir.file("paper_cmnl_result.json")));
}

TEST(Cli, CompareChecksArityAndDataHash)
{
    TempDir one, two, other;
    ASSERT_EQ(run({"--out-dir", one.path(), "estimate", "--data", small_data(), "--spec", "paper_cmnl"}).code, 0);
    ASSERT_NE(run({"--out-dir", two.path(), "estimate", "--data", small_data(), "--spec", "paper_ecmnl", "--draws", "8",
                   "--no-covariance"})
                  .code,
              2);
    const auto c = one.file("paper_cmnl_result.json"), e = two.file("paper_ecmnl_result.json");

    EXPECT_EQ(run({"--out-dir", one.path(), "compare", c}).code, 2);
    const auto ok = run({"--out-dir", one.path(), "compare", c, e});
    ASSERT_EQ(ok.code, 0) << ok.err;
    const auto rep = load_json(one.file("comparison.json"));
    const double llc = load_json(c)["log_likelihood"], lle = load_json(e)["log_likelihood"];
    EXPECT_NEAR(rep["models"][0]["lr_test"]["chi2"].get<double>(), 2 * (lle - llc), 1e-9);

    ASSERT_EQ(run({"--out-dir", other.path(), "--seed", "4", "simulate", "--spec", "paper_cmnl", "--n", "30"}).code, 0);
    ASSERT_EQ(run({"--out-dir", other.path(), "estimate", "--data", other.file("synth.csv"), "--spec", "paper_cmnl"}).code, 0);
    const auto bad = run({"--out-dir", one.path(), "compare", c, other.file("paper_cmnl_result.json")});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("different data"), std::string::npos);
}

TEST(Cli, VotReportsAndScalesWithIncome)
{
    TempDir dir;
    const auto spec = load_spec("paper_mmnl2");
    EstimationResult r;
    r.spec_name = spec.name;
    r.names = ParameterLayout(spec).names();
    r.theta = reference_theta(spec);
    write_text(dir.file("m2.json"), to_json(r, {to_spec_text(spec), "x"}).dump());

    const auto base = run({"--out-dir", dir.path(), "vot", "--result", dir.file("m2.json")});
    ASSERT_EQ(base.code, 0) << base.err;
    const auto rows = load_json(dir.file("paper_mmnl2_vot.json"))["rows"];
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_NEAR(rows[0]["mean"]["estimate"].get<double>(), 25.26, 0.01);
    EXPECT_NEAR(rows[1]["mean"]["estimate"].get<double>(), 24.02, 0.01);
    EXPECT_NEAR(rows[2]["mean"]["estimate"].get<double>(), 19.02, 0.01);
    EXPECT_TRUE(rows[0]["mean"]["lower"].is_null());

    const auto doubled = run({"--out-dir", dir.path(), "vot", "--result", dir.file("m2.json"), "--income-owner", "4489.4"});
    ASSERT_EQ(doubled.code, 0);
    const auto rows2 = load_json(dir.file("paper_mmnl2_vot.json"))["rows"];
    for (int i = 3; i < 6; ++i)
        EXPECT_NEAR(rows2[i]["mean"]["estimate"].get<double>(), 2 * rows[i]["mean"]["estimate"].get<double>(), 1e-9);
    EXPECT_EQ(rows2[6], rows[6]);
}

TEST(Cli, VotOfFixedModelHasZeroSpread)
{
    TempDir dir;
    ASSERT_EQ(run({"--out-dir", dir.path(), "estimate", "--data", small_data(), "--spec", "paper_cmnl"}).code, 0);
    const auto r = run({"--out-dir", dir.path(), "vot", "--result", dir.file("paper_cmnl_result.json"), "--kr-draws", "1000"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& row : load_json(dir.file("paper_cmnl_vot.json"))["rows"]) EXPECT_EQ(row["sd"]["estimate"], 0.0);
}

TEST(Cli, VotNeedsCoefficients)
{
    TempDir dir;
    const auto spec = parse_spec_text("model = CMNL\n[coefficients]\nrooms: attribute=h_rooms applies=housing\n", "tiny");
    EstimationResult r;
    r.spec_name = "tiny";
    r.names = {"rooms"};
    r.theta = {0.1};
    write_text(dir.file("t.json"), to_json(r, {to_spec_text(spec), "x"}).dump());
    const auto out = run({"--out-dir", dir.path(), "vot", "--result", dir.file("t.json")});
    EXPECT_EQ(out.code, 2);
}

TEST(Cli, DrawsDumpMatchesAllocation)
{
    TempDir dir;
    ASSERT_EQ(run({"--out-dir", dir.path(), "--seed", "77", "draws-dump", "--spec", "paper_mmnl1", "--n", "3", "--draws", "32"}).code, 0);
    const auto t = read_draws(dir.file("draws.bin"));
    const auto ref = allocate_draws(load_spec("paper_mmnl1"), 3, 32, 77);
    EXPECT_EQ(t.labels, ref.labels);
    EXPECT_EQ(t.values, ref.values);
    EXPECT_EQ(t.seed, 77u);
}
