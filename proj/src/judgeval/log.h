#pragma once

#include <spdlog/logger.h>

namespace judgeval {

/// Library logger. Writes to stderr so stdout stays clean for reports.
spdlog::logger& logger();

}  // namespace judgeval
