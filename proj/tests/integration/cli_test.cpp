#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include <json.hpp>

#include "judgeval/dataset.h"
#include "judgeval/prompt_registry.h"
#include "test_util.h"

namespace judgeval {
namespace {

using nlohmann::json;
using testing::slurp;
using testing::spit;
using testing::TempDir;

struct Result {
    int exit_code = -1;
    std::string out;
};

// stdout only; stderr goes to the given file.
Result cli(const std::string& args, const std::filesystem::path& err_file = "/dev/null") {
    const std::string cmd = std::string(JUDGEVAL_CLI_PATH) + " " + args + " 2>" + err_file.string();
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        for (int i = 0; i < 6; ++i) {
            items_.push_back({"c" + std::to_string(i), "source " + std::to_string(i),
                              "summary " + std::to_string(i), static_cast<double>(i * 15), {}});
        }
        save_dataset(items_, dir_ / "data.jsonl", DatasetFormat::kJsonl);
        json script = json::object();
        for (const auto& item : items_) {
            script[item_content_hash(item)] = "Score: " + std::to_string(static_cast<int>(*item.gold) + 3);
        }
        spit(dir_ / "script.json", script.dump());
    }

    std::string run_args(const std::string& extra = "") const {
        return "run --dataset " + quoted(dir_ / "data.jsonl") + " --mock-script " + quoted(dir_ / "script.json") +
               " --cache " + quoted(dir_ / "cache") + " --model mock " + extra;
    }

    TempDir dir_;
    std::vector<EvalItem> items_;
};

TEST_F(CliTest, RunPrintsTableAndWritesReport) {
    auto r = cli(run_args("--prompts P1,P5 --out " + quoted(dir_ / "report.json") + " --table " +
                          quoted(dir_ / "table.txt")),
                 dir_ / "err.txt");
    ASSERT_EQ(r.exit_code, 0) << slurp(dir_ / "err.txt");
    EXPECT_NE(r.out.find("P1       |    1.000* |"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("model: mock"), std::string::npos);
    EXPECT_EQ(slurp(dir_ / "table.txt"), r.out);
    auto report = json::parse(slurp(dir_ / "report.json"));
    EXPECT_EQ(report["rows"].size(), 2u);
    EXPECT_EQ(report["rows"][1]["template"], "P5");
    EXPECT_EQ(report["meta"]["kendall_variant"], "tau_b");
    EXPECT_NE(slurp(dir_ / "err.txt").find("backend calls 12"), std::string::npos);

    auto again = cli(run_args("--prompts P1,P5 --format json"), dir_ / "err2.txt");
    ASSERT_EQ(again.exit_code, 0);
    EXPECT_EQ(again.out, slurp(dir_ / "report.json"));
    EXPECT_NE(slurp(dir_ / "err2.txt").find("resumed 12"), std::string::npos);
}

TEST_F(CliTest, OfflineReportMatchesRun) {
    auto r = cli(run_args("--prompts P2 --tau a --format json"));
    ASSERT_EQ(r.exit_code, 0);
    auto offline = cli("report --records " + quoted(dir_ / "cache/records.jsonl") + " --dataset " +
                       quoted(dir_ / "data.jsonl") + " --tau a --format json");
    ASSERT_EQ(offline.exit_code, 0);
    EXPECT_EQ(offline.out, r.out);
}

TEST_F(CliTest, UndefinedRowExitsWithTwo) {
    spit(dir_ / "script.json", "{}");  // everything scores 0
    auto r = cli(run_args("--prompts P3"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.out.find("undefined"), std::string::npos);
}

TEST_F(CliTest, ErrorsExitWithOne) {
    EXPECT_EQ(cli(run_args("--prompts P7")).exit_code, 1);
    spit(dir_ / "dup.jsonl", "{\"id\":\"a\",\"source\":\"S\",\"summary\":\"T\",\"gold\":1}\n"
                             "{\"id\":\"a\",\"source\":\"S\",\"summary\":\"T\",\"gold\":2}\n");
    auto err = dir_ / "err.txt";
    EXPECT_EQ(cli("run --dataset " + quoted(dir_ / "dup.jsonl") + " --mock-script " +
                      quoted(dir_ / "script.json") + " --cache " + quoted(dir_ / "c2"),
                  err)
                  .exit_code,
              1);
    EXPECT_NE(slurp(err).find("DuplicateId"), std::string::npos);
    EXPECT_NE(cli("run").exit_code, 0);
    EXPECT_NE(cli("bogus").exit_code, 0);
}

TEST(CliPromptsTest, ListShowRender) {
    auto list = cli("prompts list");
    ASSERT_EQ(list.exit_code, 0);
    EXPECT_EQ(list.out,
              "P1\tzero_shot\texplanation\nP2\tzero_shot\texplanation\nP3\tzero_shot\n"
              "P4\tzero_shot\nP5\tzero_shot\nP6\tfew_shot\n");

    auto show = cli("prompts show P6");
    ASSERT_EQ(show.exit_code, 0);
    EXPECT_EQ(show.out, PromptRegistry::builtin().get("P6").body());
    EXPECT_EQ(cli("prompts show P0").exit_code, 1);

    TempDir dir;
    auto item = json::parse(slurp(testing::source_dir() / "tests/golden/fixture_item.json"));
    spit(dir / "source.txt", item["source"].get<std::string>());
    spit(dir / "summary.txt", item["summary"].get<std::string>());
    auto rendered = cli("prompts render P2 --source-file " + quoted(dir / "source.txt") + " --summary-file " +
                        quoted(dir / "summary.txt"));
    ASSERT_EQ(rendered.exit_code, 0);
    EXPECT_EQ(rendered.out, slurp(testing::source_dir() / "tests/golden/render/P2.txt"));

    auto from_dir = cli("prompts --dir " + quoted(testing::source_dir() / "prompts") + " show P3");
    EXPECT_EQ(from_dir.out, PromptRegistry::builtin().get("P3").body());
}

}  // namespace
}  // namespace judgeval
