#include "bpsforge/common.hpp"

#include <cstring>
#include <mutex>

namespace bpsforge {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("BPS_FORGE_LOG_LEVEL");
        if (env == nullptr) return LogLevel::warn;
        if (std::strcmp(env, "error") == 0) return LogLevel::error;
        if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

void log_message(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    static std::mutex mu;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard<std::mutex> lock(mu);
    std::fprintf(stderr, "[bpsforge:%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace bpsforge
