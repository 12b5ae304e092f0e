#include "judgeval.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "judgeval/backend.h"
#include "judgeval/error.h"
#include "judgeval/extraction.h"
#include "judgeval/log.h"
#include "judgeval/metrics.h"
#include "judgeval/prompt_registry.h"
#include "judgeval/report.h"
#include "judgeval/runner.h"

struct jv_registry {
    // Either owned (loaded from a directory) or the builtin singleton.
    std::optional<judgeval::PromptRegistry> owned;
    const judgeval::PromptRegistry* view = nullptr;
    std::vector<std::string> ids;
};

struct jv_backend {
    std::shared_ptr<judgeval::Backend> impl;
    judgeval::MockBackend* mock = nullptr;
};

struct jv_report {
    judgeval::CorrelationReport report;
    judgeval::RunStats stats;
};

namespace {

using judgeval::ErrorCode;
using nlohmann::json;

thread_local std::string g_last_error;

jv_status status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return JV_ERR_INVALID_ARGUMENT;
        case ErrorCode::kUnknownTemplate: return JV_ERR_UNKNOWN_TEMPLATE;
        case ErrorCode::kEmptyField: return JV_ERR_EMPTY_FIELD;
        case ErrorCode::kChecksumMismatch: return JV_ERR_CHECKSUM_MISMATCH;
        case ErrorCode::kFormatError: return JV_ERR_FORMAT;
        case ErrorCode::kDuplicateId: return JV_ERR_DUPLICATE_ID;
        case ErrorCode::kIoError: return JV_ERR_IO;
        case ErrorCode::kBackendUnavailable: return JV_ERR_BACKEND_UNAVAILABLE;
        case ErrorCode::kAuthMissing: return JV_ERR_AUTH_MISSING;
        case ErrorCode::kNoScoreFound: return JV_ERR_NO_SCORE;
        case ErrorCode::kInsufficientData: return JV_ERR_INSUFFICIENT_DATA;
        case ErrorCode::kUndefined: return JV_ERR_UNDEFINED;
    }
    return JV_ERR_INTERNAL;
}

jv_status fail(jv_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

// Runs body, translating exceptions into status codes.
template <class F>
jv_status guarded(F&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const judgeval::Error& e) {
        return fail(status_for(e.code()), e.what());
    } catch (const json::exception& e) {
        return fail(JV_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(JV_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(JV_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(JV_ERR_INTERNAL, "unknown exception");
    }
}

char* dup_string(std::string_view s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size());
    out[s.size()] = '\0';
    return out;
}

#define JV_REQUIRE(cond, what) \
    if (!(cond)) return fail(JV_ERR_INVALID_ARGUMENT, what)

void init_ids(jv_registry& r) {
    for (auto id : r.view->list()) r.ids.emplace_back(judgeval::to_string(id));
}

jv_status coefficient_out(const judgeval::Coefficient& c, double* out) {
    if (!c) {
        *out = std::numeric_limits<double>::quiet_NaN();
        return fail(JV_ERR_UNDEFINED, "coefficient is undefined for this data");
    }
    *out = *c;
    return JV_OK;
}

judgeval::ScoreSeries make_series(const double* metric, const double* human, size_t n) {
    return judgeval::ScoreSeries(std::vector<double>(metric, metric + n),
                                 std::vector<double>(human, human + n));
}

judgeval::RunConfig parse_run_config(const json& j) {
    judgeval::RunConfig c;
    c.dataset_path = j.at("dataset").get<std::string>();
    if (j.contains("dataset_format")) {
        c.dataset_format = judgeval::parse_dataset_format(j.at("dataset_format").get<std::string>());
    }
    for (const auto& id : j.at("prompts")) {
        c.template_ids.push_back(judgeval::parse_template_id(id.get<std::string>()));
    }
    c.cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("records")) c.records_path = j.at("records").get<std::string>();
    c.concurrency = j.value("concurrency", c.concurrency);
    c.explanations_enabled = j.value("explanations", c.explanations_enabled);
    c.rescore_attempts = j.value("rescore_attempts", c.rescore_attempts);
    c.truncation.max_source_chars = j.value("max_source_chars", c.truncation.max_source_chars);
    c.flush_every = j.value("flush_every", c.flush_every);
    if (j.contains("tau")) c.kendall_variant = judgeval::parse_kendall_variant(j.at("tau").get<std::string>());

    auto& b = c.backend;
    if (j.contains("backend")) {
        const auto& jb = j.at("backend");
        b.endpoint_url = jb.value("endpoint", b.endpoint_url);
        b.model_name = jb.value("model", b.model_name);
        b.max_new_tokens = jb.value("max_new_tokens", b.max_new_tokens);
        b.explanation_max_new_tokens = jb.value("explanation_max_new_tokens", b.explanation_max_new_tokens);
        b.temperature = jb.value("temperature", b.temperature);
        b.request_timeout = std::chrono::milliseconds(jb.value("timeout_ms", b.request_timeout.count()));
        b.max_retries = jb.value("max_retries", b.max_retries);
        b.auth_token_env = jb.value("auth_env", b.auth_token_env);
        b.system_message = jb.value("system_message", b.system_message);
        b.pattern_hint_field = jb.value("pattern_hint_field", b.pattern_hint_field);
        b.initial_backoff = std::chrono::milliseconds(jb.value("initial_backoff_ms", b.initial_backoff.count()));
    }
    return c;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw judgeval::Error(ErrorCode::kIoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

extern "C" {

const char* jv_version(void) { return "0.1.0"; }

jv_status jv_set_log_level(const char* level) {
    JV_REQUIRE(level, "level is NULL");
    static const std::map<std::string, spdlog::level::level_enum> kLevels = {
        {"debug", spdlog::level::debug}, {"info", spdlog::level::info}, {"warn", spdlog::level::warn},
        {"error", spdlog::level::err},   {"off", spdlog::level::off}};
    auto it = kLevels.find(level);
    if (it == kLevels.end()) return fail(JV_ERR_INVALID_ARGUMENT, std::string("unknown log level '") + level + "'");
    judgeval::logger().set_level(it->second);
    return JV_OK;
}

const char* jv_status_name(jv_status status) {
    switch (status) {
        case JV_OK: return "OK";
        case JV_ERR_INVALID_ARGUMENT: return "InvalidArgument";
        case JV_ERR_UNKNOWN_TEMPLATE: return "UnknownTemplate";
        case JV_ERR_EMPTY_FIELD: return "EmptyField";
        case JV_ERR_CHECKSUM_MISMATCH: return "ChecksumMismatch";
        case JV_ERR_FORMAT: return "FormatError";
        case JV_ERR_DUPLICATE_ID: return "DuplicateId";
        case JV_ERR_IO: return "IoError";
        case JV_ERR_BACKEND_UNAVAILABLE: return "BackendUnavailable";
        case JV_ERR_AUTH_MISSING: return "AuthMissing";
        case JV_ERR_NO_SCORE: return "NoScoreFound";
        case JV_ERR_INSUFFICIENT_DATA: return "InsufficientData";
        case JV_ERR_UNDEFINED: return "Undefined";
        case JV_ERR_INTERNAL: return "Internal";
    }
    return "Unknown";
}

const char* jv_last_error(void) { return g_last_error.c_str(); }

void jv_string_free(char* str) { std::free(str); }

jv_status jv_registry_open_builtin(jv_registry** out) {
    JV_REQUIRE(out, "out is NULL");
    return guarded([&] {
        auto r = std::make_unique<jv_registry>();
        r->view = &judgeval::PromptRegistry::builtin();
        init_ids(*r);
        *out = r.release();
        return JV_OK;
    });
}

jv_status jv_registry_open_dir(const char* dir, jv_registry** out) {
    JV_REQUIRE(dir && out, "dir or out is NULL");
    return guarded([&] {
        auto r = std::make_unique<jv_registry>();
        r->owned.emplace(judgeval::PromptRegistry::load_directory(dir));
        r->view = &*r->owned;
        init_ids(*r);
        *out = r.release();
        return JV_OK;
    });
}

void jv_registry_free(jv_registry* registry) { delete registry; }

size_t jv_registry_count(const jv_registry* registry) {
    return registry ? registry->ids.size() : 0;
}

jv_status jv_registry_id_at(const jv_registry* registry, size_t index, const char** out_id) {
    JV_REQUIRE(registry && out_id, "registry or out_id is NULL");
    JV_REQUIRE(index < registry->ids.size(), "index out of range");
    *out_id = registry->ids[index].c_str();
    return JV_OK;
}

jv_status jv_template_body(const jv_registry* registry, const char* id, const char** out_body) {
    JV_REQUIRE(registry && id && out_body, "NULL argument");
    return guarded([&] {
        *out_body = registry->view->get(std::string_view(id)).body().c_str();
        return JV_OK;
    });
}

jv_status jv_template_strategy(const jv_registry* registry, const char* id, const char** out_strategy) {
    JV_REQUIRE(registry && id && out_strategy, "NULL argument");
    return guarded([&] {
        // to_string(Strategy) returns views of string literals.
        *out_strategy = judgeval::to_string(registry->view->get(std::string_view(id)).strategy()).data();
        return JV_OK;
    });
}

jv_status jv_template_requests_explanation(const jv_registry* registry, const char* id, int* out_flag) {
    JV_REQUIRE(registry && id && out_flag, "NULL argument");
    return guarded([&] {
        *out_flag = registry->view->get(std::string_view(id)).requests_explanation() ? 1 : 0;
        return JV_OK;
    });
}

jv_status jv_render(const jv_registry* registry, const char* id, const char* source,
                    const char* summary, size_t max_source_chars, char** out_text,
                    int* out_truncated) {
    JV_REQUIRE(registry && id && source && summary && out_text, "NULL argument");
    return guarded([&] {
        judgeval::EvalItem item;
        item.source = source;
        item.summary = summary;
        auto rendered = judgeval::render(registry->view->get(std::string_view(id)), item,
                                         judgeval::TruncationPolicy{max_source_chars});
        *out_text = dup_string(rendered.text);
        if (out_truncated) *out_truncated = rendered.truncated ? 1 : 0;
        return JV_OK;
    });
}

jv_status jv_item_hash(const char* source, const char* summary, char** out_hex) {
    JV_REQUIRE(source && summary && out_hex, "NULL argument");
    return guarded([&] {
        judgeval::EvalItem item;
        item.source = source;
        item.summary = summary;
        *out_hex = dup_string(judgeval::item_content_hash(item));
        return JV_OK;
    });
}

jv_status jv_extract_score(const char* text, int* out_score, int* out_ambiguous, size_t* out_begin,
                           size_t* out_end) {
    JV_REQUIRE(text && out_score, "NULL argument");
    return guarded([&] {
        auto j = judgeval::extract_score(text);
        *out_score = j.score;
        if (out_ambiguous) *out_ambiguous = j.ambiguous ? 1 : 0;
        if (out_begin) *out_begin = j.match_span.begin;
        if (out_end) *out_end = j.match_span.end;
        return JV_OK;
    });
}

jv_status jv_extract_explanation(const char* text, char** out_text) {
    JV_REQUIRE(text && out_text, "NULL argument");
    return guarded([&] {
        *out_text = nullptr;
        auto j = judgeval::extract_score(text);
        if (auto e = judgeval::extract_explanation(text, j)) *out_text = dup_string(*e);
        return JV_OK;
    });
}

jv_status jv_kendall_tau(const double* metric, const double* human, size_t n,
                         jv_kendall_variant variant, double* out) {
    JV_REQUIRE(metric && human && out, "NULL argument");
    return guarded([&] {
        auto v = variant == JV_TAU_A ? judgeval::KendallVariant::kTauA : judgeval::KendallVariant::kTauB;
        return coefficient_out(judgeval::kendall_tau(make_series(metric, human, n), v), out);
    });
}

jv_status jv_pearson(const double* metric, const double* human, size_t n, double* out) {
    JV_REQUIRE(metric && human && out, "NULL argument");
    return guarded([&] { return coefficient_out(judgeval::pearson(make_series(metric, human, n)), out); });
}

jv_status jv_spearman(const double* metric, const double* human, size_t n, double* out) {
    JV_REQUIRE(metric && human && out, "NULL argument");
    return guarded([&] { return coefficient_out(judgeval::spearman(make_series(metric, human, n)), out); });
}

jv_status jv_backend_http(jv_backend** out) {
    JV_REQUIRE(out, "out is NULL");
    return guarded([&] {
        auto b = std::make_unique<jv_backend>();
        b->impl = std::make_shared<judgeval::HttpBackend>();
        *out = b.release();
        return JV_OK;
    });
}

jv_status jv_backend_mock(const char* script_json, jv_backend** out) {
    JV_REQUIRE(script_json && out, "NULL argument");
    return guarded([&] {
        auto parsed = json::parse(script_json);
        if (!parsed.is_object()) return fail(JV_ERR_INVALID_ARGUMENT, "mock script must be a JSON object");
        judgeval::MockBackend::Script script;
        for (const auto& [hash, reply] : parsed.items()) {
            if (reply.is_string()) {
                script[hash] = {reply.get<std::string>()};
            } else {
                script[hash] = reply.get<std::vector<std::string>>();
            }
        }
        auto mock = std::make_shared<judgeval::MockBackend>(std::move(script));
        auto b = std::make_unique<jv_backend>();
        b->mock = mock.get();
        b->impl = std::move(mock);
        *out = b.release();
        return JV_OK;
    });
}

void jv_backend_free(jv_backend* backend) { delete backend; }

uint64_t jv_backend_call_count(const jv_backend* backend) {
    return backend && backend->mock ? static_cast<uint64_t>(backend->mock->calls()) : 0;
}

jv_status jv_run(const char* config_json, jv_backend* backend, jv_report** out) {
    JV_REQUIRE(config_json && backend && out, "NULL argument");
    return guarded([&] {
        auto config = parse_run_config(json::parse(config_json));
        judgeval::Runner runner(std::move(config), backend->impl);
        auto outcome = runner.run();
        auto r = std::make_unique<jv_report>();
        r->report = std::move(outcome.report);
        r->stats = outcome.stats;
        *out = r.release();
        return JV_OK;
    });
}

jv_status jv_report_from_records(const char* records_path, const char* dataset_path,
                                 const char* dataset_format, jv_kendall_variant variant,
                                 jv_report** out) {
    JV_REQUIRE(records_path && dataset_path && out, "NULL argument");
    return guarded([&] {
        auto format = dataset_format ? judgeval::parse_dataset_format(dataset_format)
                                     : judgeval::guess_dataset_format(dataset_path);
        auto items = judgeval::load_dataset(dataset_path, format);
        if (!std::filesystem::exists(records_path)) {
            return fail(JV_ERR_IO, std::string("no record file at ") + records_path);
        }
        auto records = judgeval::read_records(records_path);

        judgeval::RunMetadata meta;
        auto info = judgeval::run_info_path(records_path);
        if (std::filesystem::exists(info)) meta = judgeval::run_metadata_from_json(read_text(info.string()));
        meta.kendall_variant =
            variant == JV_TAU_A ? judgeval::KendallVariant::kTauA : judgeval::KendallVariant::kTauB;

        auto r = std::make_unique<jv_report>();
        r->report = judgeval::build_report(records, items, meta);
        *out = r.release();
        return JV_OK;
    });
}

void jv_report_free(jv_report* report) { delete report; }

jv_status jv_report_json(const jv_report* report, char** out_json) {
    JV_REQUIRE(report && out_json, "NULL argument");
    return guarded([&] {
        *out_json = dup_string(judgeval::report_to_json(report->report));
        return JV_OK;
    });
}

jv_status jv_report_table(const jv_report* report, char** out_table) {
    JV_REQUIRE(report && out_table, "NULL argument");
    return guarded([&] {
        *out_table = dup_string(judgeval::format_table(report->report));
        return JV_OK;
    });
}

int jv_report_all_defined(const jv_report* report) {
    return report && report->report.all_defined() ? 1 : 0;
}

jv_status jv_report_run_stats(const jv_report* report, jv_run_stats* out) {
    JV_REQUIRE(report && out, "NULL argument");
    out->tasks = report->stats.tasks;
    out->resumed = report->stats.resumed;
    out->backend_calls = report->stats.backend_calls;
    out->cache_hits = report->stats.cache_hits;
    out->scored = report->stats.scored;
    out->failed = report->stats.failed;
    return JV_OK;
}

}  // extern "C"
