#include "judgeval/error.h"

namespace judgeval {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
        case ErrorCode::kEmptyField: return "EmptyField";
        case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::kFormatError: return "FormatError";
        case ErrorCode::kDuplicateId: return "DuplicateId";
        case ErrorCode::kIoError: return "IoError";
        case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
        case ErrorCode::kAuthMissing: return "AuthMissing";
        case ErrorCode::kNoScoreFound: return "NoScoreFound";
        case ErrorCode::kInsufficientData: return "InsufficientData";
        case ErrorCode::kUndefined: return "Undefined";
    }
    return "Unknown";
}

std::optional<ErrorCode> parse_error_code(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(ErrorCode::kUndefined); ++i) {
        auto code = static_cast<ErrorCode>(i);
        if (to_string(code) == name) return code;
    }
    return std::nullopt;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

BackendUnavailable::BackendUnavailable(const std::string& message, int attempt_count)
    : Error(ErrorCode::kBackendUnavailable, message), attempt_count_(attempt_count) {}

FormatError::FormatError(const std::string& message, std::size_t line)
    : Error(ErrorCode::kFormatError,
            line == 0 ? message : "line " + std::to_string(line) + ": " + message),
      line_(line) {}

}  // namespace judgeval
