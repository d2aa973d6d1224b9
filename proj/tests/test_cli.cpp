#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string output;
};

Outcome invoke(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + INFOACQ_CLI_PATH + " " + args + " 2>&1";
    Outcome o;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return o;
    char buf[4096];
    while (const auto n = fread(buf, 1, sizeof buf, pipe)) o.output.append(buf, n);
    const int status = pclose(pipe);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("infoacq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }
    [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

const char* small_config = R"(
[dataset]
kind = "two-cluster-2d"
n = 150
test = 200

[model]
members = 8

[scorer]
id = "batchbald"

[loop]
acquisition_size = 3
initial = 4
budget = 13
trials = 4
)";

} // namespace

TEST_F(CliTest, MissingScorerIdIsUsageError) {
    const auto cfg = write("bad.toml", "[dataset]\nkind = \"two-cluster-2d\"\n[loop]\nbudget = 30\n");
    const auto o = invoke("run " + cfg.string() + " --out " + path("r.csv"));
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.output.find("scorer.id"), std::string::npos) << o.output;
    EXPECT_FALSE(fs::exists(path("r.csv")));
}

TEST_F(CliTest, UnknownKeyAndBadUsage) {
    const auto cfg = write("bad.toml", "[dataset]\nkind = \"two-cluster-2d\"\ncolour = 1\n[scorer]\nid = \"bald\"\n");
    const auto o = invoke("run " + cfg.string());
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.output.find("bad.toml:3"), std::string::npos) << o.output;
    EXPECT_EQ(invoke("frobnicate").code, 2);
    EXPECT_EQ(invoke("").code, 2);
    EXPECT_EQ(invoke("run").code, 2);
    EXPECT_EQ(invoke("run " + path("missing.toml")).code, 2);
}

TEST_F(CliTest, SameSeedGivesIdenticalBytes) {
    const auto cfg = write("c.toml", small_config);
    ASSERT_EQ(invoke("run " + cfg.string() + " --seed 5 --out " + path("a.csv")).code, 0);
    ASSERT_EQ(invoke("run " + cfg.string() + " --seed 5 --out " + path("b.csv")).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
    EXPECT_EQ(slurp(path("a.csv")).substr(0, 46), "trial,round,labeled,metric,scorer,seed,wall_ms");
    ASSERT_EQ(invoke("run " + cfg.string() + " --seed 6 --out " + path("c.csv")).code, 0);
    EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(CliTest, JobsDoNotChangeResults) {
    const auto cfg = write("c.toml", small_config);
    ASSERT_EQ(invoke("run " + cfg.string() + " --jobs 1 --out " + path("one.csv")).code, 0);
    ASSERT_EQ(invoke("run " + cfg.string() + " --jobs 8 --out " + path("eight.csv")).code, 0);
    EXPECT_EQ(slurp(path("one.csv")), slurp(path("eight.csv")));
    EXPECT_EQ(slurp(path("one.jsonl")), slurp(path("eight.jsonl")));
}

TEST_F(CliTest, EnvironmentSeedIsFallback) {
    const auto cfg = write("c.toml", small_config);
    ASSERT_EQ(invoke("run " + cfg.string() + " --out " + path("env.csv"), "INFOACQ_SEED=5").code, 0);
    ASSERT_EQ(invoke("run " + cfg.string() + " --seed 5 --out " + path("flag.csv")).code, 0);
    ASSERT_EQ(invoke("run " + cfg.string() + " --seed 9 --out " + path("both.csv"), "INFOACQ_SEED=5").code, 0);
    EXPECT_EQ(slurp(path("env.csv")), slurp(path("flag.csv")));
    EXPECT_NE(slurp(path("env.csv")), slurp(path("both.csv")));
    EXPECT_EQ(invoke("run " + cfg.string() + " --out " + path("x.csv"), "INFOACQ_SEED=abc").code, 2);
}

TEST_F(CliTest, TimingColumnIsZeroUnlessRequested) {
    const auto cfg = write("c.toml", small_config);
    ASSERT_EQ(invoke("run " + cfg.string() + " --out " + path("a.csv")).code, 0);
    std::istringstream in(slurp(path("a.csv")));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
}

TEST_F(CliTest, PlotRejectsEmptyBody) {
    const auto csv = write("empty.csv", "trial,round,labeled,metric,scorer,seed,wall_ms\n");
    EXPECT_EQ(invoke("plot " + csv.string() + " --out " + path("p.svg")).code, 2);
    const auto wrong = write("wrong.csv", "a,b\n1,2\n");
    EXPECT_EQ(invoke("plot " + wrong.string() + " --out " + path("p.svg")).code, 2);
    EXPECT_FALSE(fs::exists(path("p.svg")));
}

TEST_F(CliTest, PlotSingleRunIsOnePolylineAndStable) {
    const auto csv = write("r.csv", "trial,round,labeled,metric,scorer,seed,wall_ms\n"
                                    "0,0,10,0.5,bald,3,0\n0,1,20,0.7,bald,3,0\n0,2,30,0.8,bald,3,0\n");
    ASSERT_EQ(invoke("plot " + csv.string() + " --out " + path("a.svg")).code, 0);
    ASSERT_EQ(invoke("plot " + csv.string() + " --out " + path("b.svg")).code, 0);
    const auto svg = slurp(path("a.svg"));
    EXPECT_EQ(svg, slurp(path("b.svg")));
    std::size_t lines = 0;
    for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
    EXPECT_EQ(lines, 1u);
    EXPECT_EQ(invoke("plot " + csv.string() + " --kind histogram --out " + path("h.svg")).code, 0);
    EXPECT_EQ(invoke("plot " + csv.string() + " --metric accuracy --out " + path("m.svg")).code, 2);
}

TEST_F(CliTest, RunThenPlotEndToEnd) {
    const auto cfg = write("c.toml", small_config);
    ASSERT_EQ(invoke("run " + cfg.string() + " --out " + path("r.csv")).code, 0);
    ASSERT_EQ(invoke("plot " + path("r.csv") + " --group-by scorer --out " + path("r.svg")).code, 0);
    EXPECT_NE(slurp(path("r.svg")).find("batchbald"), std::string::npos);
}

TEST_F(CliTest, RankCorrelationCsv) {
    const auto cfg = write("rank.toml", "[dataset]\nkind = \"two-cluster-2d\"\nn = 100\n[model]\nmembers = 32\n"
                                        "[scorer]\ncompare = [\"bald\", \"fisher-eig-logdet\"]\n"
                                        "[loop]\nmode = \"rank-correlation\"\ninitial = 10\ntrials = 2\n");
    ASSERT_EQ(invoke("run " + cfg.string() + " --out " + path("rank.csv")).code, 0);
    const auto text = slurp(path("rank.csv"));
    EXPECT_EQ(text.substr(0, text.find('\n')), "trial,scorer_a,scorer_b,spearman");
    EXPECT_NE(text.find("0,bald,bald,1\n"), std::string::npos) << text;
}

TEST_F(CliTest, SelfcheckPassesAndListsChecks) {
    const auto o = invoke("selfcheck");
    EXPECT_EQ(o.code, 0) << o.output;
    std::size_t named = 0;
    std::istringstream in(o.output);
    std::string line;
    while (std::getline(in, line)) named += line.rfind("PASS  ", 0) == 0;
    EXPECT_GE(named, 10u);
}

TEST_F(CliTest, SelfcheckInjectedFaultFails) {
    const auto o = invoke("selfcheck --inject-fault");
    EXPECT_EQ(o.code, 1);
    EXPECT_NE(o.output.find("FAIL"), std::string::npos);
}
