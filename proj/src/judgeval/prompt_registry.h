#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "judgeval/eval_item.h"

namespace judgeval {

enum class TemplateId { P1, P2, P3, P4, P5, P6 };

inline constexpr std::array<TemplateId, 6> kAllTemplates = {
    TemplateId::P1, TemplateId::P2, TemplateId::P3,
    TemplateId::P4, TemplateId::P5, TemplateId::P6};

std::string_view to_string(TemplateId id);
std::optional<TemplateId> try_parse_template_id(std::string_view text);
/// Throws Error(kUnknownTemplate) for anything outside P1..P6.
TemplateId parse_template_id(std::string_view text);

enum class Strategy { kZeroShot, kFewShot };

std::string_view to_string(Strategy strategy);

inline constexpr std::string_view kSourcePlaceholder = "{{source}}";
inline constexpr std::string_view kSummaryPlaceholder = "{{summary}}";

/// The score language every template asks the model to emit.
inline constexpr std::string_view kScorePattern = "(100|[1-9]?[0-9])";

struct ScoreScale {
    int min = 0;
    int max = 100;
};

/// An immutable prompt body with exactly one source slot and one summary slot.
class PromptTemplate {
public:
    /// Throws FormatError unless each placeholder occurs exactly once.
    PromptTemplate(TemplateId id, Strategy strategy, bool requests_explanation, std::string body);

    TemplateId id() const noexcept { return id_; }
    Strategy strategy() const noexcept { return strategy_; }
    bool requests_explanation() const noexcept { return requests_explanation_; }
    ScoreScale score_scale() const noexcept { return {}; }
    const std::string& body() const noexcept { return body_; }

    std::size_t source_offset() const noexcept { return source_pos_; }
    std::size_t summary_offset() const noexcept { return summary_pos_; }

private:
    TemplateId id_;
    Strategy strategy_;
    bool requests_explanation_;
    std::string body_;
    std::size_t source_pos_;
    std::size_t summary_pos_;
};

/// Head-keep truncation of the source document. Zero disables truncation.
struct TruncationPolicy {
    std::size_t max_source_chars = 12000;
};

struct RenderedPrompt {
    TemplateId template_id = TemplateId::P1;
    std::string text;
    /// Digest of the item's (source, summary) content before truncation.
    std::string source_hash;
    /// Unicode code points in text.
    std::size_t char_count = 0;
    bool truncated = false;
    bool requests_explanation = false;

    std::string rendered_hash() const;
};

/// Number of UTF-8 code points (bytes that are not continuation bytes).
std::size_t utf8_length(std::string_view text);

/// Digest identifying an item's content, independent of its id.
std::string item_content_hash(const EvalItem& item);

/// Substitutes the item into the template. Throws Error(kEmptyField) when the
/// source or summary is blank.
RenderedPrompt render(const PromptTemplate& tmpl, const EvalItem& item,
                      const TruncationPolicy& policy = {});

struct EmbeddedPromptFile {
    std::string_view name;
    std::string_view content;
};

/// manifest.json and P1.txt..P6.txt compiled into the library.
const std::vector<EmbeddedPromptFile>& embedded_prompt_files();

/// The six templates, validated against the manifest checksums. Immutable
/// after construction.
class PromptRegistry {
public:
    /// Templates compiled into the library.
    static const PromptRegistry& builtin();

    /// Loads manifest.json plus the template files it names from dir.
    static PromptRegistry load_directory(const std::filesystem::path& dir);

    /// Same parse, with file contents supplied by the caller.
    static PromptRegistry from_files(
        const std::function<std::string(std::string_view name)>& read_file);

    const PromptTemplate& get(TemplateId id) const;
    /// Throws Error(kUnknownTemplate) for unregistered ids.
    const PromptTemplate& get(std::string_view id) const;

    std::vector<TemplateId> list() const;

private:
    explicit PromptRegistry(std::vector<PromptTemplate> templates);

    std::vector<PromptTemplate> templates_;
};

/// Splits a template file into its body (everything after the first "---"
/// line). Throws FormatError when the separator is missing.
std::string template_body_from_file(std::string_view file_content);

}  // namespace judgeval
