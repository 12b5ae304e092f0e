#include "judgeval/dataset.h"

#include <unistd.h>

#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>
#include "judgeval/log.h"

namespace judgeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::kIoError, "read failed: " + path.string());
    return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::kIoError, "write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::kIoError, "rename to " + path.string() + " failed: " + ec.message());
    }
}

std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

std::optional<double> parse_number(std::string_view text) {
    double value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
    return value;
}

bool is_blank(std::string_view text) {
    return text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

std::vector<std::string_view> split_lines(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        auto eol = content.find('\n', start);
        if (eol == std::string_view::npos) eol = content.size();
        auto line = content.substr(start, eol - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = eol + 1;
    }
    return lines;
}

void apply_gold_dims(EvalItem& item, const std::vector<std::pair<std::string, double>>& dims) {
    if (dims.empty()) return;
    double sum = 0;
    for (const auto& [name, value] : dims) {
        item.meta[std::string(kGoldDimPrefix) + name] = format_number(value);
        sum += value;
    }
    if (!item.gold) item.gold = sum / static_cast<double>(dims.size());
}

void validate_item(const EvalItem& item, std::size_t line_no) {
    if (item.item_id.empty()) throw FormatError("empty id", line_no);
    if (is_blank(item.source)) throw FormatError("empty source for id '" + item.item_id + "'", line_no);
    if (is_blank(item.summary)) {
        throw FormatError("empty summary for id '" + item.item_id + "'", line_no);
    }
}

EvalItem parse_jsonl_record(std::string_view line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        throw FormatError(e.what(), line_no);
    }
    if (!obj.is_object()) throw FormatError("record is not a JSON object", line_no);

    auto require_string = [&](const char* key) {
        auto it = obj.find(key);
        if (it == obj.end()) throw FormatError(std::string("missing key '") + key + "'", line_no);
        if (it->is_string()) return it->get<std::string>();
        if (std::string_view(key) == "id" && it->is_number_integer()) return it->dump();
        throw FormatError(std::string("key '") + key + "' must be a string", line_no);
    };

    EvalItem item;
    item.item_id = require_string("id");
    item.source = require_string("source");
    item.summary = require_string("summary");

    std::vector<std::pair<std::string, double>> dims;
    for (const auto& [key, value] : obj.items()) {
        if (key == "id" || key == "source" || key == "summary") continue;
        if (key == "gold") {
            if (value.is_null()) continue;
            if (!value.is_number()) throw FormatError("'gold' must be a number", line_no);
            item.gold = value.get<double>();
        } else if (key == "gold_dims") {
            if (!value.is_object()) throw FormatError("'gold_dims' must be an object", line_no);
            for (const auto& [dim, score] : value.items()) {
                if (!score.is_number()) {
                    throw FormatError("gold_dims." + dim + " must be a number", line_no);
                }
                dims.emplace_back(dim, score.get<double>());
            }
        } else if (key == "meta") {
            if (!value.is_object()) throw FormatError("'meta' must be an object", line_no);
            for (const auto& [mk, mv] : value.items()) {
                if (!mv.is_string()) throw FormatError("meta." + mk + " must be a string", line_no);
                item.meta[mk] = mv.get<std::string>();
            }
        } else if (value.is_string()) {
            item.meta[key] = value.get<std::string>();
        } else if (value.is_number()) {
            item.meta[key] = value.is_number_float() ? format_number(value.get<double>()) : value.dump();
        } else {
            throw FormatError("unsupported value for key '" + key + "'", line_no);
        }
    }
    apply_gold_dims(item, dims);
    validate_item(item, line_no);
    return item;
}

std::string tsv_escape(std::string_view field) {
    std::string out;
    out.reserve(field.size());
    for (char c : field) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

constexpr std::string_view kTsvAbsent = "\\N";

std::string tsv_unescape(std::string_view field, std::size_t line_no) {
    std::string out;
    out.reserve(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] != '\\') {
            out.push_back(field[i]);
            continue;
        }
        if (++i == field.size()) throw FormatError("dangling backslash", line_no);
        switch (field[i]) {
            case '\\': out.push_back('\\'); break;
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            default: throw FormatError(std::string("unknown escape \\") + field[i], line_no);
        }
    }
    return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::vector<EvalItem> parse_tsv(std::string_view content) {
    auto lines = split_lines(content);
    std::size_t header_idx = 0;
    while (header_idx < lines.size() && is_blank(lines[header_idx])) ++header_idx;
    if (header_idx == lines.size()) return {};

    std::vector<std::string> columns;
    for (auto cell : split_tabs(lines[header_idx])) columns.emplace_back(cell);
    auto column_of = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        return std::nullopt;
    };
    for (const char* required : {"id", "source", "summary"}) {
        if (!column_of(required)) {
            throw FormatError(std::string("header lacks column '") + required + "'", header_idx + 1);
        }
    }
    std::set<std::string> seen(columns.begin(), columns.end());
    if (seen.size() != columns.size()) throw FormatError("duplicate column name", header_idx + 1);

    std::vector<EvalItem> items;
    for (std::size_t li = header_idx + 1; li < lines.size(); ++li) {
        auto line_no = li + 1;
        if (is_blank(lines[li])) continue;
        auto cells = split_tabs(lines[li]);
        if (cells.size() != columns.size()) {
            throw FormatError("expected " + std::to_string(columns.size()) + " cells, got " +
                                  std::to_string(cells.size()),
                              line_no);
        }
        EvalItem item;
        std::vector<std::pair<std::string, double>> dims;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto& name = columns[c];
            auto raw = cells[c];
            if (name == "id") {
                item.item_id = tsv_unescape(raw, line_no);
            } else if (name == "source") {
                item.source = tsv_unescape(raw, line_no);
            } else if (name == "summary") {
                item.summary = tsv_unescape(raw, line_no);
            } else if (name == "gold") {
                if (raw.empty() || raw == kTsvAbsent) continue;
                auto value = parse_number(raw);
                if (!value) throw FormatError("gold is not a number", line_no);
                item.gold = *value;
            } else if (name.starts_with(kGoldDimPrefix)) {
                if (raw.empty() || raw == kTsvAbsent) continue;
                auto value = parse_number(raw);
                if (!value) throw FormatError(name + " is not a number", line_no);
                dims.emplace_back(name.substr(kGoldDimPrefix.size()), *value);
            } else {
                if (raw == kTsvAbsent) continue;
                item.meta[name] = tsv_unescape(raw, line_no);
            }
        }
        apply_gold_dims(item, dims);
        validate_item(item, line_no);
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
    if (name == "jsonl") return DatasetFormat::kJsonl;
    if (name == "tsv") return DatasetFormat::kTsv;
    throw Error(ErrorCode::kInvalidArgument, "unknown dataset format '" + std::string(name) + "'");
}

DatasetFormat guess_dataset_format(const fs::path& path) {
    return path.extension() == ".tsv" ? DatasetFormat::kTsv : DatasetFormat::kJsonl;
}

std::vector<EvalItem> parse_dataset(std::string_view content, DatasetFormat format) {
    std::vector<EvalItem> items;
    std::vector<std::size_t> line_numbers;
    if (format == DatasetFormat::kJsonl) {
        auto lines = split_lines(content);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (is_blank(lines[i])) continue;
            items.push_back(parse_jsonl_record(lines[i], i + 1));
            line_numbers.push_back(i + 1);
        }
    } else {
        items = parse_tsv(content);
    }

    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!ids.insert(items[i].item_id).second) {
            std::string where = line_numbers.empty() ? "record " + std::to_string(i + 1)
                                                     : "line " + std::to_string(line_numbers[i]);
            throw Error(ErrorCode::kDuplicateId,
                        where + ": duplicate id '" + items[i].item_id + "'");
        }
    }
    return items;
}

std::vector<EvalItem> load_dataset(const fs::path& path, DatasetFormat format) {
    return parse_dataset(read_file(path), format);
}

std::string serialize_dataset(const std::vector<EvalItem>& items, DatasetFormat format) {
    std::string out;
    if (format == DatasetFormat::kJsonl) {
        for (const auto& item : items) {
            json obj = {{"id", item.item_id}, {"source", item.source}, {"summary", item.summary}};
            if (item.gold) obj["gold"] = *item.gold;
            if (!item.meta.empty()) obj["meta"] = item.meta;
            try {
                out += obj.dump();
            } catch (const json::type_error& e) {
                throw Error(ErrorCode::kInvalidArgument, "id '" + item.item_id + "': " + e.what());
            }
            out.push_back('\n');
        }
        return out;
    }

    std::set<std::string> meta_keys;
    for (const auto& item : items) {
        for (const auto& [key, value] : item.meta) meta_keys.insert(key);
    }
    out += "id\tsource\tsummary\tgold";
    for (const auto& key : meta_keys) {
        if (key == "id" || key == "source" || key == "summary" || key == "gold") {
            throw Error(ErrorCode::kInvalidArgument, "meta key '" + key + "' cannot be a TSV column");
        }
        out += "\t" + tsv_escape(key);
    }
    out.push_back('\n');
    for (const auto& item : items) {
        out += tsv_escape(item.item_id) + "\t" + tsv_escape(item.source) + "\t" +
               tsv_escape(item.summary) + "\t" + (item.gold ? format_number(*item.gold) : "");
        for (const auto& key : meta_keys) {
            auto it = item.meta.find(key);
            out += "\t";
            if (it == item.meta.end()) {
                out += kTsvAbsent;
                continue;
            }
            // gold_dims.* columns are re-read as numbers.
            if (key.starts_with(kGoldDimPrefix) && !parse_number(it->second)) {
                throw Error(ErrorCode::kInvalidArgument,
                            "meta '" + key + "' of id '" + item.item_id + "' is not a number");
            }
            out += tsv_escape(it->second);
        }
        out.push_back('\n');
    }
    return out;
}

void save_dataset(const std::vector<EvalItem>& items, const fs::path& path, DatasetFormat format) {
    write_file_atomic(path, serialize_dataset(items, format));
}

bool same_outcome(const RunRecord& a, const RunRecord& b) {
    auto strip = [](RunRecord r) {
        r.started_at_ms = 0;
        r.finished_at_ms = 0;
        return r;
    };
    return strip(a) == strip(b);
}

std::string record_to_json_line(const RunRecord& r) {
    json obj = {
        {"item_id", r.item_id},
        {"template_id", r.template_id},
        {"rendered_hash", r.rendered_hash},
        {"raw_output", r.raw_output},
        {"score", r.score ? json(*r.score) : json(nullptr)},
        {"ambiguous", r.ambiguous},
        {"explanation", r.explanation ? json(*r.explanation) : json(nullptr)},
        {"error", r.error ? json(std::string(to_string(*r.error))) : json(nullptr)},
        {"attempts", r.attempts},
        {"truncated", r.truncated},
        {"started_at_ms", r.started_at_ms},
        {"finished_at_ms", r.finished_at_ms},
    };
    // Model output is arbitrary bytes; a stray invalid sequence must not lose the record.
    return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

RunRecord record_from_json_line(std::string_view line, std::size_t line_no) {
    RunRecord r;
    try {
        auto obj = json::parse(line);
        r.item_id = obj.at("item_id").get<std::string>();
        r.template_id = obj.at("template_id").get<std::string>();
        r.rendered_hash = obj.at("rendered_hash").get<std::string>();
        r.raw_output = obj.at("raw_output").get<std::string>();
        if (const auto& s = obj.at("score"); !s.is_null()) r.score = s.get<int>();
        r.ambiguous = obj.at("ambiguous").get<bool>();
        if (const auto& e = obj.at("explanation"); !e.is_null()) r.explanation = e.get<std::string>();
        if (const auto& e = obj.at("error"); !e.is_null()) {
            auto name = e.get<std::string>();
            r.error = parse_error_code(name);
            if (!r.error) throw FormatError("unknown error code '" + name + "'", line_no);
        }
        r.attempts = obj.at("attempts").get<int>();
        r.truncated = obj.at("truncated").get<bool>();
        r.started_at_ms = obj.at("started_at_ms").get<std::int64_t>();
        r.finished_at_ms = obj.at("finished_at_ms").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw FormatError(e.what(), line_no);
    }
    if (r.score.has_value() == r.error.has_value()) {
        throw FormatError("record must carry exactly one of score and error", line_no);
    }
    if (r.score && (*r.score < 0 || *r.score > 100)) {
        throw FormatError("score out of range", line_no);
    }
    return r;
}

void write_records(const std::vector<RunRecord>& records, const fs::path& path) {
    std::string content;
    for (const auto& r : records) {
        content += record_to_json_line(r);
        content.push_back('\n');
    }
    write_file_atomic(path, content);
}

std::vector<RunRecord> read_records(const fs::path& path) {
    if (!fs::exists(path)) return {};
    auto content = read_file(path);
    std::vector<RunRecord> records;
    auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_blank(lines[i])) continue;
        records.push_back(record_from_json_line(lines[i], i + 1));
    }
    return records;
}

RecordLog::RecordLog(fs::path path, std::size_t flush_every)
    : path_(std::move(path)), flush_every_(std::max<std::size_t>(flush_every, 1)) {
    records_ = read_records(path_);
    persisted_ = records_.size();
}

RecordLog::~RecordLog() {
    try {
        flush();
    } catch (const std::exception& e) {
        logger().error("final flush of {} failed: {}", path_.string(), e.what());
    }
}

void RecordLog::append(RunRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
    if (records_.size() - persisted_ >= flush_every_) flush_locked();
}

void RecordLog::flush() {
    std::lock_guard lock(mutex_);
    flush_locked();
}

void RecordLog::flush_locked() {
    if (persisted_ == records_.size() && fs::exists(path_)) return;
    // Records already on disk are re-emitted from the same serializer, so
    // the existing prefix of the file is reproduced byte for byte.
    write_records(records_, path_);
    persisted_ = records_.size();
}

std::vector<RunRecord> RecordLog::snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t RecordLog::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

}  // namespace judgeval
