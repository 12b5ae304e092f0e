#include "judgeval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Owned {
    char* p = nullptr;
    ~Owned() { jv_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

class ScratchDir {
public:
    ScratchDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("judgeval-capi-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

TEST(CApiTest, VersionAndStatusNames) {
    EXPECT_STREQ(jv_version(), "0.1.0");
    EXPECT_STREQ(jv_status_name(JV_OK), "OK");
    EXPECT_STREQ(jv_status_name(JV_ERR_NO_SCORE), "NoScoreFound");
    EXPECT_STREQ(jv_status_name(JV_ERR_UNKNOWN_TEMPLATE), "UnknownTemplate");
}

TEST(CApiTest, RegistryLookup) {
    jv_registry* reg = nullptr;
    ASSERT_EQ(jv_registry_open_builtin(&reg), JV_OK);
    EXPECT_EQ(jv_registry_count(reg), 6u);
    const char* id = nullptr;
    ASSERT_EQ(jv_registry_id_at(reg, 5, &id), JV_OK);
    EXPECT_STREQ(id, "P6");
    EXPECT_EQ(jv_registry_id_at(reg, 6, &id), JV_ERR_INVALID_ARGUMENT);

    const char* strategy = nullptr;
    ASSERT_EQ(jv_template_strategy(reg, "P6", &strategy), JV_OK);
    EXPECT_STREQ(strategy, "few_shot");
    int flag = -1;
    ASSERT_EQ(jv_template_requests_explanation(reg, "P2", &flag), JV_OK);
    EXPECT_EQ(flag, 1);

    const char* body = nullptr;
    EXPECT_EQ(jv_template_body(reg, "P7", &body), JV_ERR_UNKNOWN_TEMPLATE);
    EXPECT_NE(std::string(jv_last_error()).find("P7"), std::string::npos);
    ASSERT_EQ(jv_template_body(reg, "P1", &body), JV_OK);
    EXPECT_NE(std::string(body).find("{{source}}"), std::string::npos);
    jv_registry_free(reg);

    jv_registry* from_dir = nullptr;
    ASSERT_EQ(jv_registry_open_dir(JUDGEVAL_SOURCE_DIR "/prompts", &from_dir), JV_OK);
    jv_registry_free(from_dir);
    EXPECT_EQ(jv_registry_open_dir("/nonexistent/prompts", &from_dir), JV_ERR_IO);
}

TEST(CApiTest, RenderAndHash) {
    jv_registry* reg = nullptr;
    ASSERT_EQ(jv_registry_open_builtin(&reg), JV_OK);
    Owned text;
    int truncated = -1;
    ASSERT_EQ(jv_render(reg, "P4", "S", "T", 0, &text.p, &truncated), JV_OK);
    EXPECT_NE(text.str().find("Source text: S,"), std::string::npos);
    EXPECT_EQ(truncated, 0);
    Owned empty;
    EXPECT_EQ(jv_render(reg, "P4", "", "T", 0, &empty.p, nullptr), JV_ERR_EMPTY_FIELD);
    jv_registry_free(reg);

    Owned a, b;
    ASSERT_EQ(jv_item_hash("S", "T", &a.p), JV_OK);
    ASSERT_EQ(jv_item_hash("S", "T", &b.p), JV_OK);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().size(), 64u);
}

TEST(CApiTest, Extraction) {
    int score = -1, ambiguous = -1;
    size_t begin = 0, end = 0;
    ASSERT_EQ(jv_extract_score("I rate it 85 out of 100", &score, &ambiguous, &begin, &end), JV_OK);
    EXPECT_EQ(score, 85);
    EXPECT_EQ(ambiguous, 1);
    EXPECT_EQ(begin, 10u);
    EXPECT_EQ(end, 12u);
    EXPECT_EQ(jv_extract_score("score is 2023-ish", &score, nullptr, nullptr, nullptr), JV_ERR_NO_SCORE);

    Owned expl;
    ASSERT_EQ(jv_extract_explanation("Score: 70. It omits the conclusion.", &expl.p), JV_OK);
    EXPECT_EQ(expl.str(), "It omits the conclusion.");
    Owned none;
    ASSERT_EQ(jv_extract_explanation("Score: 70", &none.p), JV_OK);
    EXPECT_EQ(none.p, nullptr);
}

TEST(CApiTest, Correlations) {
    const double x[] = {1, 2, 3, 4};
    const double y[] = {1, 3, 2, 4};
    double out = 0;
    ASSERT_EQ(jv_kendall_tau(x, y, 4, JV_TAU_A, &out), JV_OK);
    EXPECT_DOUBLE_EQ(out, 4.0 / 6.0);
    ASSERT_EQ(jv_spearman(x, y, 4, &out), JV_OK);
    EXPECT_DOUBLE_EQ(out, 0.8);
    const double flat[] = {2, 2, 2, 2};
    out = 42;
    EXPECT_EQ(jv_pearson(flat, y, 4, &out), JV_ERR_UNDEFINED);
    EXPECT_TRUE(std::isnan(out));
    EXPECT_EQ(jv_kendall_tau(x, y, 1, JV_TAU_B, &out), JV_ERR_INVALID_ARGUMENT);
    EXPECT_EQ(jv_pearson(nullptr, y, 4, &out), JV_ERR_INVALID_ARGUMENT);
}

TEST(CApiTest, MockRunAndOfflineReport) {
    ScratchDir dir;
    json script = json::object();
    {
        std::ofstream data(dir / "d.jsonl");
        for (int i = 0; i < 8; ++i) {
            const std::string source = "source " + std::to_string(i);
            const std::string summary = "summary " + std::to_string(i);
            data << json{{"id", "i" + std::to_string(i)}, {"source", source}, {"summary", summary},
                         {"gold", i * 10}}
                        .dump()
                 << "\n";
            Owned hash;
            ASSERT_EQ(jv_item_hash(source.c_str(), summary.c_str(), &hash.p), JV_OK);
            script[hash.str()] = json::array({"Score: " + std::to_string(i * 10 + 1)});
        }
    }
    jv_backend* backend = nullptr;
    ASSERT_EQ(jv_backend_mock(script.dump().c_str(), &backend), JV_OK);

    json config = {{"dataset", (dir / "d.jsonl").string()},
                   {"prompts", {"P1", "P6"}},
                   {"cache_dir", (dir / "cache").string()},
                   {"concurrency", 2},
                   {"backend", {{"model", "mock-model"}}}};
    jv_report* report = nullptr;
    ASSERT_EQ(jv_run(config.dump().c_str(), backend, &report), JV_OK) << jv_last_error();
    EXPECT_EQ(jv_backend_call_count(backend), 16u);
    EXPECT_EQ(jv_report_all_defined(report), 1);
    jv_run_stats stats{};
    ASSERT_EQ(jv_report_run_stats(report, &stats), JV_OK);
    EXPECT_EQ(stats.tasks, 16u);
    EXPECT_EQ(stats.scored, 16u);

    Owned report_json, table;
    ASSERT_EQ(jv_report_json(report, &report_json.p), JV_OK);
    ASSERT_EQ(jv_report_table(report, &table.p), JV_OK);
    auto parsed = json::parse(report_json.str());
    EXPECT_EQ(parsed["meta"]["model"], "mock-model");
    EXPECT_EQ(parsed["rows"][0]["kendall"], 1.0);
    EXPECT_NE(table.str().find("1.000*"), std::string::npos);
    jv_report_free(report);

    jv_report* offline = nullptr;
    ASSERT_EQ(jv_report_from_records((dir / "cache/records.jsonl").c_str(), (dir / "d.jsonl").c_str(),
                                     nullptr, JV_TAU_B, &offline),
              JV_OK);
    Owned offline_json;
    ASSERT_EQ(jv_report_json(offline, &offline_json.p), JV_OK);
    EXPECT_EQ(offline_json.str(), report_json.str());
    jv_report_free(offline);
    jv_backend_free(backend);
}

TEST(CApiTest, RunErrorsMapToStatus) {
    ScratchDir dir;
    const std::string cache = (dir / "cache").string();
    jv_backend* backend = nullptr;
    ASSERT_EQ(jv_backend_mock("{}", &backend), JV_OK);
    jv_report* report = nullptr;
    EXPECT_EQ(jv_run("{not json", backend, &report), JV_ERR_INVALID_ARGUMENT);
    json config = {{"dataset", "/nonexistent.jsonl"}, {"prompts", {"P1"}}, {"cache_dir", cache}};
    EXPECT_EQ(jv_run(config.dump().c_str(), backend, &report), JV_ERR_IO);
    config["prompts"] = {"P9"};
    EXPECT_EQ(jv_run(config.dump().c_str(), backend, &report), JV_ERR_UNKNOWN_TEMPLATE);
    EXPECT_EQ(jv_backend_mock("[1]", &backend), JV_ERR_INVALID_ARGUMENT);
    jv_backend_free(backend);
}

}  // namespace
