#include "judgeval/backend.h"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include "judgeval/log.h"

#include "judgeval/error.h"

namespace judgeval {

using nlohmann::json;

namespace {

struct Endpoint {
    std::string scheme_host_port;
    std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::kInvalidArgument, "endpoint URL lacks a scheme: " + url);
    }
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw Error(ErrorCode::kInvalidArgument, "unsupported URL scheme: " + scheme);
    }
    auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.scheme_host_port = url.substr(0, path_start);
    ep.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
    constexpr std::string_view kSuffix = "/chat/completions";
    if (!ep.path.ends_with(kSuffix)) ep.path += kSuffix;
    return ep;
}

bool is_transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

struct AttemptFailure {
    std::string message;
    bool retryable;
};

}  // namespace

std::string_view to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::kStop: return "stop";
        case FinishReason::kLength: return "length";
        case FinishReason::kError: return "error";
    }
    return "error";
}

FinishReason parse_finish_reason(std::string_view text) {
    if (text == "length") return FinishReason::kLength;
    if (text == "error") return FinishReason::kError;
    return FinishReason::kStop;
}

void BackendConfig::validate() const {
    if (temperature < 0) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
    if (max_retries < 0) throw Error(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
    if (max_new_tokens < 8 || explanation_max_new_tokens < 8) {
        throw Error(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 8");
    }
    if (request_timeout.count() <= 0) {
        throw Error(ErrorCode::kInvalidArgument, "request timeout must be positive");
    }
    if (model_name.empty()) throw Error(ErrorCode::kInvalidArgument, "model name is empty");
}

std::string build_chat_request(const BackendConfig& config, const RenderedPrompt& prompt) {
    json messages = json::array();
    if (!config.system_message.empty()) {
        messages.push_back({{"role", "system"}, {"content", config.system_message}});
    }
    messages.push_back({{"role", "user"}, {"content", prompt.text}});
    json body = {
        {"model", config.model_name},
        {"messages", messages},
        {"max_tokens", config.effective_max_new_tokens(prompt.requests_explanation)},
        {"temperature", config.temperature},
        {"stream", false},
    };
    // A regex hint only fits replies that are a bare score.
    if (!config.pattern_hint_field.empty() && !prompt.requests_explanation) {
        body[config.pattern_hint_field] = std::string(kScorePattern);
    }
    return body.dump();
}

CompletionResult HttpBackend::complete(const BackendConfig& config, const RenderedPrompt& prompt) {
    config.validate();
    httplib::Headers headers;
    if (!config.auth_token_env.empty()) {
        const char* token = std::getenv(config.auth_token_env.c_str());
        if (token == nullptr || *token == '\0') {
            throw Error(ErrorCode::kAuthMissing,
                        "environment variable " + config.auth_token_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    const auto endpoint = parse_endpoint(config.endpoint_url);
    const auto body = build_chat_request(config, prompt);
    const auto timeout = config.request_timeout;
    const int max_attempts = config.max_retries + 1;
    const auto started = std::chrono::steady_clock::now();

    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (attempt > 1) {
            auto delay = config.initial_backoff * (1LL << std::min(attempt - 2, 16));
            delay = std::min<std::chrono::milliseconds>(delay, std::chrono::seconds(60));
            logger().warn("request failed ({}), retry {}/{} in {} ms", last_error, attempt - 1,
                         config.max_retries, delay.count());
            std::this_thread::sleep_for(delay);
        }

        httplib::Client client(endpoint.scheme_host_port);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        auto res = client.Post(endpoint.path, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            if (is_transient_status(res->status)) continue;
            throw BackendUnavailable(last_error + ": " + res->body.substr(0, 200), attempt);
        }

        json reply;
        try {
            reply = json::parse(res->body);
            const auto& choice = reply.at("choices").at(0);
            CompletionResult out;
            if (choice.contains("message")) {
                const auto& content = choice.at("message").at("content");
                out.text = content.is_null() ? "" : content.get<std::string>();
            } else {
                out.text = choice.at("text").get<std::string>();
            }
            const auto& reason = choice.value("finish_reason", json(nullptr));
            out.finish_reason =
                reason.is_string() ? parse_finish_reason(reason.get<std::string>()) : FinishReason::kStop;
            out.attempt_count = attempt;
            out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            return out;
        } catch (const json::exception& e) {
            last_error = std::string("malformed reply: ") + e.what();
        }
    }
    throw BackendUnavailable("giving up after " + std::to_string(max_attempts) +
                                 " attempts: " + last_error,
                             max_attempts);
}

MockBackend::MockBackend(Script script) : script_(std::move(script)) {}

CompletionResult MockBackend::complete(const BackendConfig&, const RenderedPrompt& prompt) {
    const int now = ++in_flight_;
    int seen = max_in_flight_.load();
    while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
    }
    struct Leave {
        std::atomic<int>& counter;
        ~Leave() { --counter; }
    } leave{in_flight_};

    const auto started = std::chrono::steady_clock::now();
    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);

    const long long limit = fail_after_.load();
    const long long call = calls_++;
    if (limit >= 0 && call >= limit) {
        throw BackendUnavailable("mock backend is down", 1);
    }

    CompletionResult out;
    auto it = script_.find(prompt.source_hash);
    if (it == script_.end() || it->second.empty()) {
        out.text = std::string(kFallback);
    } else {
        std::size_t index;
        {
            std::lock_guard lock(mutex_);
            index = served_[prompt.rendered_hash()]++;
        }
        out.text = it->second[std::min(index, it->second.size() - 1)];
    }
    out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    return out;
}

std::unique_ptr<MockBackend> mock_backend(const std::map<std::string, std::string>& replies) {
    MockBackend::Script script;
    for (const auto& [hash, text] : replies) script[hash] = {text};
    return std::make_unique<MockBackend>(std::move(script));
}

}  // namespace judgeval
