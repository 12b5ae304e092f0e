#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace judgeval {

struct TextSpan {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

struct ExtractedJudgment {
    int score = 0;
    TextSpan match_span;
    std::optional<std::string> explanation;
    /// More than one standalone score token was present.
    bool ambiguous = false;
};

/// Every standalone match of (100|[1-9]?[0-9]), left to right. A token is
/// standalone when it is a whole maximal digit run; letters and punctuation
/// around it are fine ("95/100" yields two tokens, "2023" yields none).
std::vector<TextSpan> find_score_tokens(std::string_view text);

/// First standalone token wins. Throws Error(kNoScoreFound) when there is
/// none, including for empty text.
ExtractedJudgment extract_score(std::string_view text);

/// Text after an "Explanation" marker when present, otherwise whatever
/// follows the score token. Leading separators and surrounding whitespace
/// are stripped; an empty remainder is nullopt.
std::optional<std::string> extract_explanation(std::string_view text,
                                               const ExtractedJudgment& judgment);

/// Forces a score into [0, 100], logging when it had to.
int clamp_score(long long score_like);

}  // namespace judgeval
