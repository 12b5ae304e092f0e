#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "judgeval/error.h"
#include "judgeval/eval_item.h"

namespace judgeval {

enum class DatasetFormat { kJsonl, kTsv };

DatasetFormat parse_dataset_format(std::string_view name);
/// jsonl unless the extension is .tsv.
DatasetFormat guess_dataset_format(const std::filesystem::path& path);

/// Meta key prefix under which per-dimension human scores are kept.
inline constexpr std::string_view kGoldDimPrefix = "gold_dims.";

/// Reads a dataset in input order. Records with a `gold_dims` object and no
/// `gold` get the arithmetic mean of the dimensions as gold.
std::vector<EvalItem> load_dataset(const std::filesystem::path& path, DatasetFormat format);
std::vector<EvalItem> parse_dataset(std::string_view content, DatasetFormat format);

void save_dataset(const std::vector<EvalItem>& items, const std::filesystem::path& path,
                  DatasetFormat format);
std::string serialize_dataset(const std::vector<EvalItem>& items, DatasetFormat format);

/// One (item, template) outcome. Exactly one of score and error is set.
struct RunRecord {
    std::string item_id;
    std::string template_id;
    std::string rendered_hash;
    std::string raw_output;
    std::optional<int> score;
    bool ambiguous = false;
    std::optional<std::string> explanation;
    std::optional<ErrorCode> error;
    int attempts = 1;
    bool truncated = false;
    std::int64_t started_at_ms = 0;
    std::int64_t finished_at_ms = 0;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Equality ignoring the two timestamps.
bool same_outcome(const RunRecord& a, const RunRecord& b);

std::string record_to_json_line(const RunRecord& record);
RunRecord record_from_json_line(std::string_view line, std::size_t line_no = 0);

/// Atomically replaces path with the given records (temp file + rename).
void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& path);
/// A missing file reads as an empty collection.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

/// Single-writer append log. Records become visible on disk at flush(),
/// which rewrites the whole file via temp + rename, so readers never see a
/// partial line and records already on disk are never altered.
class RecordLog {
public:
    /// Picks up whatever the file already holds.
    explicit RecordLog(std::filesystem::path path, std::size_t flush_every = 32);
    ~RecordLog();

    RecordLog(const RecordLog&) = delete;
    RecordLog& operator=(const RecordLog&) = delete;

    void append(RunRecord record);
    void flush();

    std::vector<RunRecord> snapshot() const;
    std::size_t size() const;

private:
    void flush_locked();

    std::filesystem::path path_;
    std::size_t flush_every_;
    mutable std::mutex mutex_;
    std::vector<RunRecord> records_;
    std::size_t persisted_ = 0;
};

}  // namespace judgeval
