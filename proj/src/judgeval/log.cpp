#include "judgeval/log.h"

#include <spdlog/sinks/stdout_sinks.h>

namespace judgeval {

spdlog::logger& logger() {
    static auto instance = [] {
        auto l = std::make_shared<spdlog::logger>("judgeval", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        l->set_pattern("judgeval: [%l] %v");
        return l;
    }();
    return *instance;
}

}  // namespace judgeval
