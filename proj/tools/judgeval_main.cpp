// judgeval command line: run an evaluation, rebuild a report offline, or
// inspect the prompt templates. Talks to the library only through judgeval.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "judgeval.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUndefinedRow = 2;

struct RegistryDeleter {
    void operator()(jv_registry* r) const { jv_registry_free(r); }
};
struct BackendDeleter {
    void operator()(jv_backend* b) const { jv_backend_free(b); }
};
struct ReportDeleter {
    void operator()(jv_report* r) const { jv_report_free(r); }
};
struct StringDeleter {
    void operator()(char* s) const { jv_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

class ApiError : public std::runtime_error {
public:
    explicit ApiError(jv_status status)
        : std::runtime_error(std::string(jv_status_name(status)) + ": " + jv_last_error()) {}
};

void check(jv_status status) {
    if (status != JV_OK) throw ApiError(status);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path);
}

std::vector<std::string> split_ids(const std::string& list) {
    std::vector<std::string> ids;
    std::stringstream ss(list);
    std::string id;
    while (std::getline(ss, id, ',')) {
        if (!id.empty()) ids.push_back(id);
    }
    return ids;
}

jv_kendall_variant tau_of(const std::string& tau) { return tau == "a" ? JV_TAU_A : JV_TAU_B; }

int emit_report(const jv_report* report, const std::string& out_path, const std::string& table_path,
                const std::string& format) {
    char* raw = nullptr;
    check(jv_report_json(report, &raw));
    OwnedString json_text(raw);
    check(jv_report_table(report, &raw));
    OwnedString table(raw);

    if (!out_path.empty()) write_file(out_path, json_text.get());
    if (!table_path.empty()) write_file(table_path, table.get());
    std::cout << (format == "json" ? json_text.get() : table.get());

    if (!jv_report_all_defined(report)) {
        std::cerr << "judgeval: at least one template has an undefined coefficient\n";
        return kExitUndefinedRow;
    }
    return kExitOk;
}

struct RunOptions {
    std::string dataset;
    std::string dataset_format;
    std::string prompts = "P1,P2,P3,P4,P5,P6";
    std::string endpoint = "http://localhost:8000/v1";
    std::string model = "orca_mini_v3_7b";
    std::string cache = ".judgeval-cache";
    std::string records;
    std::string out;
    std::string table;
    std::string tau = "b";
    std::string auth_env;
    std::string system_message;
    std::string pattern_hint_field;
    std::string mock_script;
    std::string format = "text";
    int concurrency = 4;
    bool no_explanations = false;
    int max_new_tokens = 512;
    int explanation_max_new_tokens = 1024;
    double temperature = 0.0;
    double timeout_s = 120;
    int max_retries = 2;
    int rescore_attempts = 1;
    std::size_t max_source_chars = 12000;
};

int do_run(const RunOptions& o) {
    nlohmann::json config = {
        {"dataset", o.dataset},
        {"prompts", split_ids(o.prompts)},
        {"cache_dir", o.cache},
        {"concurrency", o.concurrency},
        {"explanations", !o.no_explanations},
        {"rescore_attempts", o.rescore_attempts},
        {"max_source_chars", o.max_source_chars},
        {"tau", o.tau},
        {"backend",
         {{"endpoint", o.endpoint},
          {"model", o.model},
          {"max_new_tokens", o.max_new_tokens},
          {"explanation_max_new_tokens", o.explanation_max_new_tokens},
          {"temperature", o.temperature},
          {"timeout_ms", static_cast<long long>(o.timeout_s * 1000)},
          {"max_retries", o.max_retries},
          {"auth_env", o.auth_env},
          {"system_message", o.system_message},
          {"pattern_hint_field", o.pattern_hint_field}}},
    };
    if (!o.dataset_format.empty()) config["dataset_format"] = o.dataset_format;
    if (!o.records.empty()) config["records"] = o.records;

    jv_backend* raw_backend = nullptr;
    if (o.mock_script.empty()) {
        check(jv_backend_http(&raw_backend));
    } else {
        check(jv_backend_mock(read_file(o.mock_script).c_str(), &raw_backend));
    }
    std::unique_ptr<jv_backend, BackendDeleter> backend(raw_backend);

    jv_report* raw_report = nullptr;
    check(jv_run(config.dump().c_str(), backend.get(), &raw_report));
    std::unique_ptr<jv_report, ReportDeleter> report(raw_report);

    jv_run_stats stats{};
    check(jv_report_run_stats(report.get(), &stats));
    std::cerr << "pairs " << stats.tasks << ", resumed " << stats.resumed << ", backend calls "
              << stats.backend_calls << ", cache hits " << stats.cache_hits << ", scored "
              << stats.scored << ", failed " << stats.failed << "\n";
    return emit_report(report.get(), o.out, o.table, o.format);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-as-judge summarization scoring and meta-evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(jv_version()));
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "Diagnostics on stderr")
        ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}))
        ->capture_default_str();

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Score a dataset with the selected prompts and correlate");
    run_cmd->add_option("--dataset", run.dataset, "JSONL or TSV dataset")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--dataset-format", run.dataset_format, "jsonl or tsv (default: by extension)")
        ->check(CLI::IsMember({"jsonl", "tsv"}));
    run_cmd->add_option("--prompts", run.prompts, "Comma-separated template ids")->capture_default_str();
    run_cmd->add_option("--endpoint", run.endpoint, "OpenAI-compatible base URL")->capture_default_str();
    run_cmd->add_option("--model", run.model, "Model name sent to the endpoint")->capture_default_str();
    run_cmd->add_option("--cache", run.cache, "Response cache directory")->capture_default_str();
    run_cmd->add_option("--records", run.records, "Record file (default: <cache>/records.jsonl)");
    run_cmd->add_option("--concurrency", run.concurrency, "Requests in flight")
        ->check(CLI::PositiveNumber)->capture_default_str();
    run_cmd->add_flag("--no-explanations", run.no_explanations, "Do not request explanations");
    run_cmd->add_option("--tau", run.tau, "Kendall variant")->check(CLI::IsMember({"a", "b"}))->capture_default_str();
    run_cmd->add_option("--out", run.out, "Write the JSON report here");
    run_cmd->add_option("--table", run.table, "Write the text table here");
    run_cmd->add_option("--format", run.format, "stdout format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    run_cmd->add_option("--max-new-tokens", run.max_new_tokens)->capture_default_str();
    run_cmd->add_option("--explanation-max-new-tokens", run.explanation_max_new_tokens)->capture_default_str();
    run_cmd->add_option("--temperature", run.temperature)->capture_default_str();
    run_cmd->add_option("--timeout", run.timeout_s, "Per-request timeout in seconds")->capture_default_str();
    run_cmd->add_option("--max-retries", run.max_retries)->capture_default_str();
    run_cmd->add_option("--auth-env", run.auth_env, "Environment variable holding a bearer token");
    run_cmd->add_option("--system-message", run.system_message);
    run_cmd->add_option("--pattern-hint-field", run.pattern_hint_field,
                        "Request field for the score regex, e.g. guided_regex");
    run_cmd->add_option("--rescore-attempts", run.rescore_attempts)->capture_default_str();
    run_cmd->add_option("--max-source-chars", run.max_source_chars, "0 disables truncation")->capture_default_str();
    run_cmd->add_option("--mock-script", run.mock_script,
                        "JSON map of item hash -> reply; replaces the HTTP backend")
        ->check(CLI::ExistingFile);

    std::string records, dataset, dataset_format, tau = "b", out, table, format = "text";
    auto* report_cmd = app.add_subcommand("report", "Recompute a report from a record file");
    report_cmd->add_option("--records", records)->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--dataset", dataset, "Dataset holding the gold scores")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--dataset-format", dataset_format)->check(CLI::IsMember({"jsonl", "tsv"}));
    report_cmd->add_option("--tau", tau)->check(CLI::IsMember({"a", "b"}))->capture_default_str();
    report_cmd->add_option("--out", out, "Write the JSON report here");
    report_cmd->add_option("--table", table, "Write the text table here");
    report_cmd->add_option("--format", format)->check(CLI::IsMember({"text", "json"}))->capture_default_str();

    auto* prompts_cmd = app.add_subcommand("prompts", "Inspect the prompt templates");
    prompts_cmd->require_subcommand(1);
    std::string prompts_dir;
    prompts_cmd->add_option("--dir", prompts_dir, "Load templates from a directory instead of the built-ins");
    prompts_cmd->add_subcommand("list", "List template ids with their strategy");
    std::string show_id;
    auto* show_cmd = prompts_cmd->add_subcommand("show", "Print a template body verbatim");
    show_cmd->add_option("id", show_id)->required();
    std::string render_id, source_file, summary_file;
    std::size_t render_max_chars = 12000;
    auto* render_cmd = prompts_cmd->add_subcommand("render", "Render a template against files");
    render_cmd->add_option("id", render_id)->required();
    render_cmd->add_option("--source-file", source_file)->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--summary-file", summary_file)->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--max-source-chars", render_max_chars)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        check(jv_set_log_level(log_level.c_str()));
        if (*run_cmd) return do_run(run);

        if (*report_cmd) {
            jv_report* raw = nullptr;
            check(jv_report_from_records(records.c_str(), dataset.c_str(),
                                         dataset_format.empty() ? nullptr : dataset_format.c_str(),
                                         tau_of(tau), &raw));
            std::unique_ptr<jv_report, ReportDeleter> report(raw);
            return emit_report(report.get(), out, table, format);
        }

        jv_registry* raw_registry = nullptr;
        check(prompts_dir.empty() ? jv_registry_open_builtin(&raw_registry)
                                  : jv_registry_open_dir(prompts_dir.c_str(), &raw_registry));
        std::unique_ptr<jv_registry, RegistryDeleter> registry(raw_registry);

        if (*show_cmd) {
            const char* body = nullptr;
            check(jv_template_body(registry.get(), show_id.c_str(), &body));
            std::fputs(body, stdout);
            return kExitOk;
        }
        if (*render_cmd) {
            char* text = nullptr;
            int truncated = 0;
            check(jv_render(registry.get(), render_id.c_str(), read_file(source_file).c_str(),
                            read_file(summary_file).c_str(), render_max_chars, &text, &truncated));
            OwnedString owned(text);
            std::fputs(owned.get(), stdout);
            if (truncated) std::cerr << "judgeval: source truncated to " << render_max_chars << " characters\n";
            return kExitOk;
        }
        for (std::size_t i = 0; i < jv_registry_count(registry.get()); ++i) {
            const char* id = nullptr;
            const char* strategy = nullptr;
            int explains = 0;
            check(jv_registry_id_at(registry.get(), i, &id));
            check(jv_template_strategy(registry.get(), id, &strategy));
            check(jv_template_requests_explanation(registry.get(), id, &explains));
            std::cout << id << "\t" << strategy << (explains ? "\texplanation" : "") << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "judgeval: " << e.what() << "\n";
        return kExitError;
    }
}
