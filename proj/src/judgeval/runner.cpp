#include "judgeval/runner.h"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "judgeval/log.h"

#include "judgeval/error.h"
#include "judgeval/extraction.h"

namespace judgeval {

namespace fs = std::filesystem;

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

void RunConfig::validate() const {
    if (template_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "no templates selected");
    std::set<TemplateId> unique(template_ids.begin(), template_ids.end());
    if (unique.size() != template_ids.size()) {
        throw Error(ErrorCode::kInvalidArgument, "a template is listed twice");
    }
    if (concurrency < 1) throw Error(ErrorCode::kInvalidArgument, "concurrency must be >= 1");
    if (rescore_attempts < 0) throw Error(ErrorCode::kInvalidArgument, "rescore_attempts must be >= 0");
    if (cache_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "cache directory is required");
    backend.validate();
}

fs::path RunConfig::effective_records_path() const {
    return records_path.empty() ? cache_dir / "records.jsonl" : records_path;
}

fs::path run_info_path(const fs::path& records_path) {
    auto p = records_path;
    p += ".run.json";
    return p;
}

Runner::Runner(RunConfig config, std::shared_ptr<Backend> backend, const PromptRegistry& registry)
    : config_(std::move(config)), backend_(std::move(backend)), registry_(registry) {
    config_.validate();
    if (!backend_) throw Error(ErrorCode::kInvalidArgument, "no backend");
    cache_ = std::make_unique<ResponseCache>(config_.cache_dir);
}

RunMetadata Runner::metadata() const {
    RunMetadata meta;
    meta.model = config_.backend.model_name;
    meta.temperature = config_.backend.temperature;
    meta.max_new_tokens = config_.backend.max_new_tokens;
    meta.explanations_enabled = config_.explanations_enabled;
    meta.kendall_variant = config_.kendall_variant;
    return meta;
}

RunRecord Runner::score_item(const EvalItem& item, TemplateId template_id) {
    RunRecord record;
    record.item_id = item.item_id;
    record.template_id = std::string(to_string(template_id));
    record.started_at_ms = now_ms();

    const auto& tmpl = registry_.get(template_id);
    RenderedPrompt prompt;
    try {
        prompt = render(tmpl, item, config_.truncation);
    } catch (const Error& e) {
        record.error = e.code();
        record.attempts = 0;
        record.finished_at_ms = now_ms();
        return record;
    }
    prompt.requests_explanation = tmpl.requests_explanation() && config_.explanations_enabled;
    record.rendered_hash = prompt.rendered_hash();
    record.truncated = prompt.truncated;

    const int attempts = 1 + config_.rescore_attempts;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const auto key = CacheKey::compute(config_.backend, prompt, attempt);
        std::string text;
        if (auto cached = cache_->get(key)) {
            ++cache_hits_;
            text = std::move(cached->text);
        } else {
            ++backend_calls_;
            auto result = backend_->complete(config_.backend, prompt);
            cache_->put(key, {result.text, result.finish_reason});
            text = std::move(result.text);
        }

        record.raw_output = text;
        record.attempts = attempt + 1;
        try {
            auto judgment = extract_score(text);
            record.score = judgment.score;
            record.ambiguous = judgment.ambiguous;
            if (prompt.requests_explanation) record.explanation = extract_explanation(text, judgment);
            record.finished_at_ms = now_ms();
            return record;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kNoScoreFound) throw;
        }
    }
    record.error = ErrorCode::kNoScoreFound;
    record.finished_at_ms = now_ms();
    return record;
}

RunOutcome Runner::run() {
    const auto format = config_.dataset_format.value_or(guess_dataset_format(config_.dataset_path));
    const auto items = load_dataset(config_.dataset_path, format);
    for (const auto& item : items) {
        if (!item.gold) {
            throw Error(ErrorCode::kInvalidArgument,
                        "item '" + item.item_id + "' has no gold score to correlate against");
        }
    }

    const auto records_path = config_.effective_records_path();
    RecordLog log(records_path, config_.flush_every);
    {
        std::ofstream info(run_info_path(records_path), std::ios::trunc);
        info << run_metadata_to_json(metadata());
    }

    std::set<std::pair<std::string, std::string>> done;
    for (const auto& r : log.snapshot()) done.emplace(r.item_id, r.template_id);

    struct Task {
        const EvalItem* item;
        TemplateId template_id;
    };
    std::vector<Task> tasks;
    RunStats stats;
    for (const auto& item : items) {
        for (TemplateId tid : config_.template_ids) {
            ++stats.tasks;
            if (done.count({item.item_id, std::string(to_string(tid))})) {
                ++stats.resumed;
                continue;
            }
            tasks.push_back({&item, tid});
        }
    }
    logger().info("{} pairs, {} already recorded, {} to score", stats.tasks, stats.resumed,
                 tasks.size());

    backend_calls_ = 0;
    cache_hits_ = 0;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (!stop.load()) {
            const auto index = next++;
            if (index >= tasks.size()) return;
            try {
                log.append(score_item(*tasks[index].item, tasks[index].template_id));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
        }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config_.concurrency),
                                               tasks.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    log.flush();
    if (failure) std::rethrow_exception(failure);

    // Only the pairs this run covers feed the report.
    std::set<std::string> selected;
    for (TemplateId tid : config_.template_ids) selected.emplace(to_string(tid));
    std::set<std::string> item_ids;
    for (const auto& item : items) item_ids.insert(item.item_id);
    std::vector<RunRecord> relevant;
    for (auto& r : log.snapshot()) {
        if (selected.count(r.template_id) && item_ids.count(r.item_id)) relevant.push_back(std::move(r));
    }
    for (const auto& r : relevant) (r.score ? stats.scored : stats.failed)++;

    stats.backend_calls = backend_calls_.load();
    stats.cache_hits = cache_hits_.load();

    RunOutcome outcome;
    outcome.report = build_report(relevant, items, metadata(), config_.template_ids);
    outcome.stats = stats;
    return outcome;
}

}  // namespace judgeval
