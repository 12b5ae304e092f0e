#include "judgeval/report.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "judgeval/error.h"

namespace judgeval {

using nlohmann::json;

namespace {

json coefficient_json(const Coefficient& c) { return c ? json(*c) : json(nullptr); }

Coefficient coefficient_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json meta_json(const RunMetadata& meta) {
    json obj = json::object();
    if (meta.model) obj["model"] = *meta.model;
    if (meta.temperature) obj["temperature"] = *meta.temperature;
    if (meta.max_new_tokens) obj["max_new_tokens"] = *meta.max_new_tokens;
    if (meta.explanations_enabled) obj["explanations_enabled"] = *meta.explanations_enabled;
    obj["kendall_variant"] = std::string(to_string(meta.kendall_variant));
    return obj;
}

RunMetadata meta_from(const json& obj) {
    RunMetadata meta;
    if (obj.contains("model")) meta.model = obj.at("model").get<std::string>();
    if (obj.contains("temperature")) meta.temperature = obj.at("temperature").get<double>();
    if (obj.contains("max_new_tokens")) meta.max_new_tokens = obj.at("max_new_tokens").get<int>();
    if (obj.contains("explanations_enabled")) {
        meta.explanations_enabled = obj.at("explanations_enabled").get<bool>();
    }
    meta.kendall_variant = parse_kendall_variant(obj.at("kendall_variant").get<std::string>());
    return meta;
}

std::string format_cell(const Coefficient& value, bool best) {
    if (!value) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f%s", *value, best ? "*" : "");
    return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

bool CorrelationReport::all_defined() const {
    return !rows.empty() &&
           std::all_of(rows.begin(), rows.end(), [](const TemplateRow& r) { return r.defined(); });
}

const TemplateRow* CorrelationReport::row(TemplateId id) const {
    for (const auto& r : rows) {
        if (r.template_id == id) return &r;
    }
    return nullptr;
}

CorrelationReport build_report(const std::vector<RunRecord>& runs,
                               const std::vector<EvalItem>& items, const RunMetadata& meta,
                               const std::vector<TemplateId>& templates) {
    std::unordered_map<std::string, std::size_t> item_index;
    for (std::size_t i = 0; i < items.size(); ++i) item_index.emplace(items[i].item_id, i);

    // template -> item position -> latest record
    std::map<TemplateId, std::map<std::size_t, const RunRecord*>> grouped;
    for (TemplateId id : templates) grouped[id];
    for (const auto& run : runs) {
        auto tid = try_parse_template_id(run.template_id);
        if (!tid) {
            throw Error(ErrorCode::kInvalidArgument,
                        "record names unknown template '" + run.template_id + "'");
        }
        auto it = item_index.find(run.item_id);
        if (it == item_index.end()) {
            throw Error(ErrorCode::kInvalidArgument,
                        "record names unknown item '" + run.item_id + "'");
        }
        if (!items[it->second].gold) {
            throw Error(ErrorCode::kInvalidArgument,
                        "item '" + run.item_id + "' has no gold score");
        }
        grouped[*tid][it->second] = &run;
    }

    CorrelationReport report;
    report.meta = meta;
    for (const auto& [tid, by_item] : grouped) {
        TemplateRow row;
        row.template_id = tid;
        std::vector<double> metric, human;
        // Dataset order, so the floating-point sums do not depend on record order.
        for (const auto& [pos, record] : by_item) {
            if (!record->score) {
                ++row.n_failed;
                continue;
            }
            metric.push_back(static_cast<double>(*record->score));
            human.push_back(*items[pos].gold);
        }
        row.n_scored = metric.size();
        if (row.n_scored >= 2) {
            ScoreSeries series(std::move(metric), std::move(human));
            row.kendall = kendall_tau(series, meta.kendall_variant);
            row.pearson = pearson(series);
            row.spearman = spearman(series);
        }
        report.rows.push_back(row);
    }
    return report;
}

void require_sufficient_data(const CorrelationReport& report) {
    std::string short_rows;
    for (const auto& row : report.rows) {
        if (row.insufficient_data()) {
            if (!short_rows.empty()) short_rows += ", ";
            short_rows += std::string(to_string(row.template_id)) + " (" +
                          std::to_string(row.n_scored) + " scored)";
        }
    }
    if (!short_rows.empty()) {
        throw Error(ErrorCode::kInsufficientData, "fewer than two scored items: " + short_rows);
    }
}

std::string run_metadata_to_json(const RunMetadata& meta) { return meta_json(meta).dump(2) + "\n"; }

RunMetadata run_metadata_from_json(std::string_view json_text) {
    try {
        return meta_from(json::parse(json_text));
    } catch (const json::exception& e) {
        throw FormatError(std::string("run metadata: ") + e.what(), 0);
    }
}

std::string report_to_json(const CorrelationReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({
            {"template", std::string(to_string(r.template_id))},
            {"kendall", coefficient_json(r.kendall)},
            {"pearson", coefficient_json(r.pearson)},
            {"spearman", coefficient_json(r.spearman)},
            {"n_scored", r.n_scored},
            {"n_failed", r.n_failed},
        });
    }
    json obj = {{"meta", meta_json(report.meta)}, {"rows", rows}};
    return obj.dump(2) + "\n";
}

CorrelationReport report_from_json(std::string_view json_text) {
    try {
        auto obj = json::parse(json_text);
        CorrelationReport report;
        report.meta = meta_from(obj.at("meta"));
        for (const auto& r : obj.at("rows")) {
            TemplateRow row;
            row.template_id = parse_template_id(r.at("template").get<std::string>());
            row.kendall = coefficient_from(r.at("kendall"));
            row.pearson = coefficient_from(r.at("pearson"));
            row.spearman = coefficient_from(r.at("spearman"));
            row.n_scored = r.at("n_scored").get<std::size_t>();
            row.n_failed = r.at("n_failed").get<std::size_t>();
            report.rows.push_back(row);
        }
        return report;
    } catch (const json::exception& e) {
        throw FormatError(std::string("report: ") + e.what(), 0);
    }
}

std::string format_table(const CorrelationReport& report) {
    using Getter = Coefficient TemplateRow::*;
    const Getter columns[] = {&TemplateRow::kendall, &TemplateRow::pearson, &TemplateRow::spearman};

    std::vector<std::optional<double>> best;
    for (auto column : columns) {
        std::optional<double> top;
        for (const auto& r : report.rows) {
            const auto& v = r.*column;
            if (v && (!top || *v > *top)) top = v;
        }
        best.push_back(top);
    }

    constexpr std::size_t kIdWidth = 8;
    constexpr std::size_t kWidth = 10;
    std::string out;
    out += pad_right("", kIdWidth);
    out += " |" + pad_left("Kendall", kWidth) + " |" + pad_left("Pearson", kWidth) + " |" +
           pad_left("Spearman", kWidth) + " |" + pad_left("scored", kWidth) + " |" +
           pad_left("failed", kWidth) + "\n";
    out += std::string(kIdWidth, '-');
    for (int i = 0; i < 5; ++i) out += "-+" + std::string(kWidth, '-');
    out += "\n";
    for (const auto& r : report.rows) {
        out += pad_right(std::string(to_string(r.template_id)), kIdWidth);
        for (std::size_t c = 0; c < 3; ++c) {
            const auto& v = r.*columns[c];
            const bool is_best = v && best[c] && *v == *best[c];
            out += " |" + pad_left(format_cell(v, is_best), kWidth);
        }
        out += " |" + pad_left(std::to_string(r.n_scored), kWidth);
        out += " |" + pad_left(std::to_string(r.n_failed), kWidth) + "\n";
    }
    out += "Kendall: " + std::string(to_string(report.meta.kendall_variant));
    if (report.meta.model) out += "; model: " + *report.meta.model;
    if (report.meta.explanations_enabled) {
        out += std::string("; explanations: ") + (*report.meta.explanations_enabled ? "on" : "off");
    }
    out += "; * = best in column\n";
    return out;
}

}  // namespace judgeval
