#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace judgeval {

enum class ErrorCode {
    kInvalidArgument,
    kUnknownTemplate,
    kEmptyField,
    kChecksumMismatch,
    kFormatError,
    kDuplicateId,
    kIoError,
    kBackendUnavailable,
    kAuthMissing,
    kNoScoreFound,
    kInsufficientData,
    kUndefined,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view name);

/// Base for every error the harness raises. The code is what crosses the C
/// boundary; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class BackendUnavailable : public Error {
public:
    BackendUnavailable(const std::string& message, int attempt_count);
    int attempt_count() const noexcept { return attempt_count_; }

private:
    int attempt_count_;
};

class FormatError : public Error {
public:
    /// line is 1-based; 0 when the failure is not tied to a line.
    FormatError(const std::string& message, std::size_t line);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace judgeval
