#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "judgeval/backend.h"
#include "judgeval/cache.h"
#include "judgeval/dataset.h"
#include "judgeval/prompt_registry.h"
#include "judgeval/report.h"

namespace judgeval {

struct RunConfig {
    std::filesystem::path dataset_path;
    /// Guessed from the extension when unset.
    std::optional<DatasetFormat> dataset_format;
    std::vector<TemplateId> template_ids;
    BackendConfig backend;
    std::filesystem::path cache_dir;
    /// Defaults to <cache_dir>/records.jsonl.
    std::filesystem::path records_path;
    int concurrency = 4;
    /// Global switch; explanations are only ever read for templates that ask
    /// for them.
    bool explanations_enabled = true;
    /// Extra completions requested when a reply holds no score.
    int rescore_attempts = 1;
    TruncationPolicy truncation;
    KendallVariant kendall_variant = KendallVariant::kTauB;
    std::size_t flush_every = 32;

    void validate() const;
    std::filesystem::path effective_records_path() const;
};

struct RunStats {
    std::size_t tasks = 0;            // (item, template) pairs in the run
    std::size_t resumed = 0;          // pairs already in the record file
    std::size_t backend_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t scored = 0;
    std::size_t failed = 0;
};

struct RunOutcome {
    CorrelationReport report;
    RunStats stats;
};

/// Sidecar written next to the record file so offline reports know how the
/// records were produced.
std::filesystem::path run_info_path(const std::filesystem::path& records_path);

/// dataset -> render -> complete -> extract -> persist -> correlate.
class Runner {
public:
    Runner(RunConfig config, std::shared_ptr<Backend> backend,
           const PromptRegistry& registry = PromptRegistry::builtin());

    /// Runs every (item, template) pair not already recorded, then builds the
    /// report from the full record file. Transport errors stop the run after
    /// the records gathered so far are flushed, then propagate.
    RunOutcome run();

    /// One pair: render, complete (or reuse the cache), extract. A reply
    /// without a score is re-requested up to rescore_attempts times before
    /// the record is marked NoScoreFound. Transport errors propagate.
    RunRecord score_item(const EvalItem& item, TemplateId template_id);

    RunMetadata metadata() const;

private:
    RunConfig config_;
    std::shared_ptr<Backend> backend_;
    const PromptRegistry& registry_;
    std::unique_ptr<ResponseCache> cache_;
    std::atomic<std::size_t> backend_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace judgeval
