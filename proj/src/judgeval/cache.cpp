#include "judgeval/cache.h"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include "judgeval/log.h"

#include "judgeval/digest.h"
#include "judgeval/error.h"

namespace judgeval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string exact_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

}  // namespace

CacheKey CacheKey::compute(const BackendConfig& config, const RenderedPrompt& prompt, int attempt) {
    FieldDigest digest;
    digest.add("judgeval-cache-v1")
        .add(config.model_name)
        .add(to_string(prompt.template_id))
        .add(prompt.rendered_hash())
        .add(exact_number(config.temperature))
        .add(std::to_string(config.effective_max_new_tokens(prompt.requests_explanation)))
        .add(config.system_message)
        .add(prompt.requests_explanation || config.pattern_hint_field.empty()
                 ? std::string()
                 : config.pattern_hint_field)
        .add(std::to_string(attempt));
    return CacheKey(digest.hex());
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_ / "responses", ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create cache dir " + dir_.string());
}

fs::path ResponseCache::entry_path(const CacheKey& key) const {
    return dir_ / "responses" / key.hex().substr(0, 2) / (key.hex() + ".json");
}

std::optional<CachedCompletion> ResponseCache::get(const CacheKey& key) const {
    std::ifstream in(entry_path(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        auto obj = json::parse(buf.str());
        if (obj.at("key").get<std::string>() != key.hex()) return std::nullopt;
        CachedCompletion out;
        out.text = obj.at("text").get<std::string>();
        out.finish_reason = parse_finish_reason(obj.at("finish_reason").get<std::string>());
        return out;
    } catch (const json::exception& e) {
        logger().warn("ignoring unreadable cache entry {}: {}", entry_path(key).string(), e.what());
        return std::nullopt;
    }
}

void ResponseCache::put(const CacheKey& key, const CachedCompletion& completion) {
    static std::atomic<unsigned long long> counter{0};
    const auto path = entry_path(key);
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    json obj = {{"key", key.hex()},
                {"text", completion.text},
                {"finish_reason", std::string(to_string(completion.finish_reason))}};
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << obj.dump() << '\n';
        if (!out) throw Error(ErrorCode::kIoError, "cannot write cache entry " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::kIoError, "cannot commit cache entry " + path.string());
    }
}

}  // namespace judgeval
