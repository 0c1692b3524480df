#include <ergoflow/cli.hpp>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using ergoflow::cli::run;

namespace
{

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliFiles : public ::testing::Test
{
protected:
    fs::path dir;
    void SetUp() override
    {
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("ergoflow_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    fs::path write(const std::string &name, const std::string &text)
    {
        std::ofstream(dir / name) << text;
        return dir / name;
    }
};

const fs::path kData = ERGOFLOW_TEST_DATA;

} // namespace

TEST(Cli, FibonacciTableEndsAtThirteen)
{
    const Result r = invoke({"cf", "--quotients", "1,1,1,1,1,1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["report"]["convergents"].back()["q"], 13);
    EXPECT_EQ(doc["report"]["convergents"].back()["p"], 8);
    EXPECT_EQ(doc["meta"]["command"], "cf");
    EXPECT_TRUE(doc["meta"]["verdicts"]["sandwich"].get<bool>());
}

TEST(Cli, HelpExitsZero)
{
    const Result r = invoke({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("correlate"), std::string::npos);
}

TEST(Cli, MissingOrUnknownCommandIsConfigError)
{
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"frobnicate"}).code, 2);
    EXPECT_EQ(invoke({"cf", "--no-such-flag"}).code, 2);
}

TEST_F(CliFiles, MalformedJsonWritesNothing)
{
    const fs::path cfg = write("bad.json", "{\"cf\": [1, 2");
    const fs::path out = dir / "run";
    const Result r = invoke({"--config", cfg.string(), "--out", out.string(), "cf"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("ConfigError"), std::string::npos);
    EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliFiles, MissingKeyAndMissingSeedAreConfigErrors)
{
    const fs::path k = write("k.json", "{\"cf\": [1, 2, 3]}");
    EXPECT_EQ(invoke({"--config", k.string(), "kesten"}).code, 2);
    const fs::path g = write("g.json", "{\"samples\": 100}");
    const Result r = invoke({"--config", g.string(), "gauss-kuzmin"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("seed"), std::string::npos);
}

TEST_F(CliFiles, DomainErrorExitsOneWithErrorName)
{
    const fs::path k = write("k.json", "{\"cf\": [1, 2, 3], \"level\": 5, \"count\": 10}");
    const Result r = invoke({"--config", k.string(), "kesten"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.err.rfind("InsufficientDepth", 0), 0u) << r.err;
}

TEST(Cli, CorrelateMatchesGoldenCsv)
{
    const Result r = invoke({"--config", (kData / "mix.json").string(), "correlate"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,estimate,stderr");
    EXPECT_EQ(r.out, slurp(kData / "mix_golden.csv"));
}

TEST(Cli, SeedFlagOverridesConfig)
{
    const Result a = invoke({"--config", (kData / "mix.json").string(), "correlate"});
    const Result b = invoke({"--seed", "12", "--config", (kData / "mix.json").string(), "correlate"});
    ASSERT_EQ(b.code, 0);
    EXPECT_NE(a.out, b.out);
}

TEST_F(CliFiles, BundleIndexesOneSeries)
{
    const fs::path out = dir / "run";
    ASSERT_EQ(invoke({"--config", (kData / "mix.json").string(), "--out", out.string(), "correlate"}).code, 0);
    fs::remove(out / "correlation.json");
    const Result r = invoke({"bundle", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto index = nlohmann::json::parse(slurp(out / "index.json"));
    EXPECT_EQ(index["count"], 1);
    EXPECT_EQ(index["artifacts"][0]["file"], "correlation.csv");
    EXPECT_EQ(index["artifacts"][0]["rows"], 3);
}

TEST_F(CliFiles, BundleIsIdempotentAndCarriesMeta)
{
    const fs::path out = dir / "run";
    ASSERT_EQ(invoke({"--config", (kData / "mix.json").string(), "--out", out.string(), "correlate"}).code, 0);
    ASSERT_EQ(invoke({"--out", out.string(), "bundle"}).code, 0);
    const std::string first = slurp(out / "index.json");
    ASSERT_EQ(invoke({"bundle", out.string()}).code, 0);
    EXPECT_EQ(slurp(out / "index.json"), first);
    const auto index = nlohmann::json::parse(first);
    ASSERT_EQ(index["count"], 2);
    const auto &j = index["artifacts"][1];
    EXPECT_EQ(j["file"], "correlation.json");
    EXPECT_EQ(j["seed"], 11);
    EXPECT_EQ(j["int_budget"], 4096);
    EXPECT_TRUE(j["verdicts"].contains("rigidity_decreasing"));
}

TEST_F(CliFiles, BundleOfEmptyDirectoryIsDomainError)
{
    EXPECT_EQ(invoke({"bundle", dir.string()}).code, 1);
    EXPECT_EQ(invoke({"bundle", (dir / "absent").string()}).code, 1);
}

TEST_F(CliFiles, ConstructionPipelineBundle)
{
    const fs::path cfg = write("con.json", R"({"beta": {"fixture": "beta", "depth": 7},
        "roof": {"fixture": "construction"}, "samples": 2000, "seed": 1})");
    const fs::path out = dir / "run";
    const Result r = invoke({"--config", cfg.string(), "--out", out.string(), "construct"});
    ASSERT_EQ(r.code, 0) << r.err;
    ASSERT_EQ(invoke({"bundle", out.string()}).code, 0);
    const auto index = nlohmann::json::parse(slurp(out / "index.json"));
    std::vector<std::string> files;
    for (const auto &e : index["artifacts"])
        files.push_back(e["file"]);
    EXPECT_EQ(files, (std::vector<std::string>{"construction.json", "correlation.csv", "s1s2.json"}));
    const auto &v = index["artifacts"][0]["verdicts"];
    EXPECT_TRUE(v["all_exact"].get<bool>());
    EXPECT_TRUE(v["s1_increasing"].get<bool>());
    EXPECT_TRUE(v["s2_decreasing"].get<bool>());
}

TEST_F(CliFiles, OutputsAreRunToRunIdentical)
{
    const fs::path a = dir / "a", b = dir / "b";
    ASSERT_EQ(invoke({"--seed", "4", "--config", (kData / "mix.json").string(), "--out", a.string(), "correlate"}).code, 0);
    ASSERT_EQ(invoke({"--seed", "4", "--config", (kData / "mix.json").string(), "--out", b.string(), "correlate"}).code, 0);
    for (const char *f : {"correlation.csv", "correlation.json"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
