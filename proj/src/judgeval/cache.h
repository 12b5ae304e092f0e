#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "judgeval/backend.h"

namespace judgeval {

/// Digest over everything that can change a completion: model, template,
/// rendered prompt, decoding settings and the rescore attempt index.
class CacheKey {
public:
    static CacheKey compute(const BackendConfig& config, const RenderedPrompt& prompt,
                            int attempt);

    const std::string& hex() const noexcept { return hex_; }
    friend bool operator==(const CacheKey&, const CacheKey&) = default;

private:
    explicit CacheKey(std::string hex) : hex_(std::move(hex)) {}
    std::string hex_;
};

struct CachedCompletion {
    std::string text;
    FinishReason finish_reason = FinishReason::kStop;
};

/// Content-addressed store of raw completions, one JSON file per key under
/// <dir>/responses/<2 hex>/<key>.json. Writes are atomic; concurrent readers
/// and writers on distinct keys need no locking.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<CachedCompletion> get(const CacheKey& key) const;
    void put(const CacheKey& key, const CachedCompletion& completion);

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path entry_path(const CacheKey& key) const;

    std::filesystem::path dir_;
};

}  // namespace judgeval
