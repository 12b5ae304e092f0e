#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "judgeval/dataset.h"
#include "judgeval/metrics.h"
#include "judgeval/prompt_registry.h"

namespace judgeval {

/// Describes how the scores in a report were produced. Only the Kendall
/// variant is always known; the rest is absent for offline reports built
/// from records without run info.
struct RunMetadata {
    std::optional<std::string> model;
    std::optional<double> temperature;
    std::optional<int> max_new_tokens;
    std::optional<bool> explanations_enabled;
    KendallVariant kendall_variant = KendallVariant::kTauB;

    friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct TemplateRow {
    TemplateId template_id = TemplateId::P1;
    Coefficient kendall;
    Coefficient pearson;
    Coefficient spearman;
    std::size_t n_scored = 0;
    std::size_t n_failed = 0;

    bool insufficient_data() const { return n_scored < 2; }
    bool defined() const { return kendall && pearson && spearman; }
};

struct CorrelationReport {
    RunMetadata meta;
    std::vector<TemplateRow> rows;  // P1..P6 order

    bool all_defined() const;
    const TemplateRow* row(TemplateId id) const;
};

/// Pools every scored (item, template) pair into one series per template and
/// correlates it with the items' gold scores. Failed runs only count towards
/// n_failed. When a pair has several records the last one wins. Rows are
/// emitted for the templates seen in runs plus any listed in `templates`.
/// Throws Error(kInvalidArgument) for runs naming unknown items or templates,
/// or items without gold.
CorrelationReport build_report(const std::vector<RunRecord>& runs,
                               const std::vector<EvalItem>& items, const RunMetadata& meta,
                               const std::vector<TemplateId>& templates = {});

/// Throws Error(kInsufficientData) naming every template with fewer than two
/// scored items.
void require_sufficient_data(const CorrelationReport& report);

std::string report_to_json(const CorrelationReport& report);
CorrelationReport report_from_json(std::string_view json_text);

/// Templates as rows, Kendall/Pearson/Spearman as columns, three decimals,
/// '*' after the best value in each column.
std::string format_table(const CorrelationReport& report);

std::string run_metadata_to_json(const RunMetadata& meta);
RunMetadata run_metadata_from_json(std::string_view json_text);

}  // namespace judgeval
