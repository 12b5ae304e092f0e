#include "judgeval/extraction.h"

#include <algorithm>
#include <cctype>

#include "judgeval/log.h"

#include "judgeval/error.h"

namespace judgeval {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Whole-run match against (100|[1-9]?[0-9]).
bool is_score_token(std::string_view run) {
    switch (run.size()) {
        case 1: return true;
        case 2: return run[0] != '0';
        case 3: return run == "100";
        default: return false;
    }
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::optional<std::string> non_empty(std::string_view s) {
    if (s.empty()) return std::nullopt;
    return std::string(s);
}

// Case-insensitive search for the explanation label.
std::size_t find_marker(std::string_view text) {
    constexpr std::string_view kMarker = "explanation";
    if (text.size() < kMarker.size()) return std::string_view::npos;
    for (std::size_t i = 0; i + kMarker.size() <= text.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < kMarker.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(text[i + k])) != kMarker[k]) {
                match = false;
                break;
            }
        }
        if (match) return i + kMarker.size();
    }
    return std::string_view::npos;
}

}  // namespace

std::vector<TextSpan> find_score_tokens(std::string_view text) {
    std::vector<TextSpan> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() && is_digit(text[end])) ++end;
        if (is_score_token(text.substr(i, end - i))) tokens.push_back({i, end});
        i = end;
    }
    return tokens;
}

ExtractedJudgment extract_score(std::string_view text) {
    auto tokens = find_score_tokens(text);
    if (tokens.empty()) {
        throw Error(ErrorCode::kNoScoreFound, "no score token in model output");
    }
    const auto& first = tokens.front();
    int value = 0;
    for (std::size_t i = first.begin; i < first.end; ++i) value = value * 10 + (text[i] - '0');

    ExtractedJudgment out;
    out.score = value;
    out.match_span = first;
    out.ambiguous = tokens.size() > 1;
    return out;
}

std::optional<std::string> extract_explanation(std::string_view text,
                                               const ExtractedJudgment& judgment) {
    std::string_view rest;
    if (auto marker = find_marker(text); marker != std::string_view::npos) {
        rest = text.substr(marker);
    } else if (judgment.match_span.end <= text.size()) {
        rest = text.substr(judgment.match_span.end);
    }
    rest = trim(rest);
    while (!rest.empty() && std::string_view(":.,;)-*").find(rest.front()) != std::string_view::npos) {
        rest.remove_prefix(1);
        rest = trim(rest);
    }
    return non_empty(rest);
}

int clamp_score(long long score_like) {
    if (score_like < 0) {
        logger().warn("score {} below 0, clamped to 0", score_like);
        return 0;
    }
    if (score_like > 100) {
        logger().warn("score {} above 100, clamped to 100", score_like);
        return 100;
    }
    return static_cast<int>(score_like);
}

}  // namespace judgeval
