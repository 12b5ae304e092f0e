#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "judgeval/prompt_registry.h"

namespace judgeval {

enum class FinishReason { kStop, kLength, kError };

std::string_view to_string(FinishReason reason);
FinishReason parse_finish_reason(std::string_view text);

struct BackendConfig {
    /// Base URL of an OpenAI-compatible server ("/chat/completions" is
    /// appended unless already present).
    std::string endpoint_url = "http://localhost:8000/v1";
    std::string model_name = "orca_mini_v3_7b";
    int max_new_tokens = 512;
    /// Budget for prompts that ask for an explanation after the score.
    int explanation_max_new_tokens = 1024;
    double temperature = 0.0;
    std::chrono::milliseconds request_timeout{std::chrono::seconds(120)};
    int max_retries = 2;
    /// Environment variable holding a bearer token. Empty means no auth.
    std::string auth_token_env;
    /// Optional system-role message sent ahead of the prompt.
    std::string system_message;
    /// Request field that carries the score regex for servers with guided
    /// decoding (e.g. "guided_regex"). Empty disables the hint.
    std::string pattern_hint_field;
    /// First retry delay; doubles per retry.
    std::chrono::milliseconds initial_backoff{500};

    /// Throws Error(kInvalidArgument) on out-of-range settings.
    void validate() const;

    int effective_max_new_tokens(bool wants_explanation) const {
        return wants_explanation ? explanation_max_new_tokens : max_new_tokens;
    }
};

struct CompletionResult {
    std::string text;
    std::chrono::milliseconds latency{0};
    int attempt_count = 1;
    FinishReason finish_reason = FinishReason::kStop;
};

/// Sends one rendered prompt and returns the model's text. Implementations
/// are reentrant. complete() never looks at the text for scores.
class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResult complete(const BackendConfig& config, const RenderedPrompt& prompt) = 0;
};

/// OpenAI-compatible chat/completions over HTTP(S). Retries transport errors,
/// HTTP 429 and 5xx with exponential backoff; other 4xx fail at once.
/// Throws BackendUnavailable or Error(kAuthMissing).
class HttpBackend final : public Backend {
public:
    CompletionResult complete(const BackendConfig& config, const RenderedPrompt& prompt) override;
};

/// JSON request body for one prompt. Exposed for tests.
std::string build_chat_request(const BackendConfig& config, const RenderedPrompt& prompt);

/// Canned replies keyed by RenderedPrompt::source_hash. A key may hold a
/// sequence: the k-th call for the same rendered prompt gets element k (the
/// last element repeats). Unscripted prompts get "Score: 0".
class MockBackend final : public Backend {
public:
    using Script = std::map<std::string, std::vector<std::string>>;

    static constexpr std::string_view kFallback = "Score: 0";

    explicit MockBackend(Script script);

    CompletionResult complete(const BackendConfig& config, const RenderedPrompt& prompt) override;

    /// Sleep this long inside every call, so overlap is observable.
    void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }
    /// After this many successful calls, every call throws BackendUnavailable.
    void fail_after(long long calls) { fail_after_ = calls; }

    long long calls() const { return calls_.load(); }
    int max_in_flight() const { return max_in_flight_.load(); }

private:
    Script script_;
    std::chrono::milliseconds latency_{0};
    std::atomic<long long> fail_after_{-1};
    std::atomic<long long> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
    std::mutex mutex_;
    std::map<std::string, std::size_t> served_;  // rendered hash -> replies given
};

/// One canned reply per source hash.
std::unique_ptr<MockBackend> mock_backend(const std::map<std::string, std::string>& replies);

}  // namespace judgeval
