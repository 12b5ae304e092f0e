#include "judgeval/prompt_registry.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "judgeval/digest.h"
#include "judgeval/error.h"

namespace judgeval {

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t count = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

bool is_blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    });
}

// Byte length of the first max_chars code points.
std::size_t utf8_prefix_bytes(std::string_view text, std::size_t max_chars) {
    std::size_t chars = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
            if (chars == max_chars) return i;
            ++chars;
        }
    }
    return text.size();
}

}  // namespace

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::P1: return "P1";
        case TemplateId::P2: return "P2";
        case TemplateId::P3: return "P3";
        case TemplateId::P4: return "P4";
        case TemplateId::P5: return "P5";
        case TemplateId::P6: return "P6";
    }
    return "?";
}

std::optional<TemplateId> try_parse_template_id(std::string_view text) {
    for (TemplateId id : kAllTemplates) {
        if (to_string(id) == text) return id;
    }
    return std::nullopt;
}

TemplateId parse_template_id(std::string_view text) {
    if (auto id = try_parse_template_id(text)) return *id;
    throw Error(ErrorCode::kUnknownTemplate, "unknown template id '" + std::string(text) + "'");
}

std::string_view to_string(Strategy strategy) {
    return strategy == Strategy::kFewShot ? "few_shot" : "zero_shot";
}

PromptTemplate::PromptTemplate(TemplateId id, Strategy strategy, bool requests_explanation,
                               std::string body)
    : id_(id),
      strategy_(strategy),
      requests_explanation_(requests_explanation),
      body_(std::move(body)) {
    for (auto placeholder : {kSourcePlaceholder, kSummaryPlaceholder}) {
        auto n = count_occurrences(body_, placeholder);
        if (n != 1) {
            throw FormatError("template " + std::string(to_string(id)) + " has " +
                                  std::to_string(n) + " occurrences of " + std::string(placeholder),
                              0);
        }
    }
    source_pos_ = body_.find(kSourcePlaceholder);
    summary_pos_ = body_.find(kSummaryPlaceholder);
}

std::string RenderedPrompt::rendered_hash() const { return sha256_hex(text); }

std::size_t utf8_length(std::string_view text) {
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::string item_content_hash(const EvalItem& item) {
    return FieldDigest().add(item.source).add(item.summary).hex();
}

RenderedPrompt render(const PromptTemplate& tmpl, const EvalItem& item,
                      const TruncationPolicy& policy) {
    if (is_blank(item.source)) {
        throw Error(ErrorCode::kEmptyField, "item '" + item.item_id + "' has an empty source");
    }
    if (is_blank(item.summary)) {
        throw Error(ErrorCode::kEmptyField, "item '" + item.item_id + "' has an empty summary");
    }

    std::string_view source = item.source;
    bool truncated = false;
    if (policy.max_source_chars > 0) {
        auto keep = utf8_prefix_bytes(source, policy.max_source_chars);
        truncated = keep < source.size();
        source = source.substr(0, keep);
    }

    struct Slot {
        std::size_t pos;
        std::size_t len;
        std::string_view value;
    };
    std::array<Slot, 2> slots = {{
        {tmpl.source_offset(), kSourcePlaceholder.size(), source},
        {tmpl.summary_offset(), kSummaryPlaceholder.size(), item.summary},
    }};
    std::sort(slots.begin(), slots.end(),
              [](const Slot& a, const Slot& b) { return a.pos < b.pos; });

    std::string_view body = tmpl.body();
    std::string text;
    text.reserve(body.size() + source.size() + item.summary.size());
    std::size_t cursor = 0;
    for (const auto& slot : slots) {
        text.append(body.substr(cursor, slot.pos - cursor));
        text.append(slot.value);
        cursor = slot.pos + slot.len;
    }
    text.append(body.substr(cursor));

    RenderedPrompt out;
    out.template_id = tmpl.id();
    out.char_count = utf8_length(text);
    out.text = std::move(text);
    out.source_hash = item_content_hash(item);
    out.truncated = truncated;
    out.requests_explanation = tmpl.requests_explanation();
    return out;
}

std::string template_body_from_file(std::string_view content) {
    constexpr std::string_view kSeparator = "---\n";
    std::size_t pos = 0;
    while (pos < content.size()) {
        if (content.substr(pos).starts_with(kSeparator)) {
            return std::string(content.substr(pos + kSeparator.size()));
        }
        auto eol = content.find('\n', pos);
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    throw FormatError("template file has no '---' separator line", 0);
}

PromptRegistry::PromptRegistry(std::vector<PromptTemplate> templates)
    : templates_(std::move(templates)) {}

PromptRegistry PromptRegistry::from_files(
    const std::function<std::string(std::string_view)>& read_file) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file("manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest.json: ") + e.what(), 0);
    }

    std::vector<std::optional<PromptTemplate>> slots(kAllTemplates.size());
    try {
        for (const auto& entry : manifest.at("templates")) {
            auto id = parse_template_id(entry.at("id").get<std::string>());
            auto strategy_name = entry.at("strategy").get<std::string>();
            Strategy strategy;
            if (strategy_name == "zero_shot") {
                strategy = Strategy::kZeroShot;
            } else if (strategy_name == "few_shot") {
                strategy = Strategy::kFewShot;
            } else {
                throw FormatError("manifest.json: unknown strategy '" + strategy_name + "'", 0);
            }
            // P6 is the one few-shot variant.
            if ((strategy == Strategy::kFewShot) != (id == TemplateId::P6)) {
                throw FormatError("manifest.json: wrong strategy for " + std::string(to_string(id)),
                                  0);
            }

            auto file_name = entry.at("file").get<std::string>();
            auto body = template_body_from_file(read_file(file_name));
            auto expected = entry.at("sha256").get<std::string>();
            if (sha256_hex(body) != expected) {
                throw Error(ErrorCode::kChecksumMismatch,
                            file_name + ": body checksum does not match manifest.json");
            }

            auto& slot = slots[static_cast<std::size_t>(id)];
            if (slot) {
                throw Error(ErrorCode::kDuplicateId,
                            "manifest.json lists " + std::string(to_string(id)) + " twice");
            }
            slot.emplace(id, strategy, entry.at("requests_explanation").get<bool>(),
                         std::move(body));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest.json: ") + e.what(), 0);
    }

    std::vector<PromptTemplate> templates;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) {
            throw FormatError(
                "manifest.json is missing " + std::string(to_string(kAllTemplates[i])), 0);
        }
        templates.push_back(std::move(*slots[i]));
    }
    return PromptRegistry(std::move(templates));
}

PromptRegistry PromptRegistry::load_directory(const std::filesystem::path& dir) {
    return from_files([&](std::string_view name) {
        auto path = dir / std::string(name);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    });
}

const PromptRegistry& PromptRegistry::builtin() {
    static const PromptRegistry registry = from_files([](std::string_view name) {
        for (const auto& file : embedded_prompt_files()) {
            if (file.name == name) return std::string(file.content);
        }
        throw Error(ErrorCode::kIoError, "no embedded prompt file " + std::string(name));
    });
    return registry;
}

const PromptTemplate& PromptRegistry::get(TemplateId id) const {
    return templates_.at(static_cast<std::size_t>(id));
}

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
    return get(parse_template_id(id));
}

std::vector<TemplateId> PromptRegistry::list() const {
    return {kAllTemplates.begin(), kAllTemplates.end()};
}

}  // namespace judgeval
