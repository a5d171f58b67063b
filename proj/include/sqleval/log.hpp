#pragma once

#include <cstdio>
#include <mutex>
#include <string>

namespace sqleval {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

inline LogLevel& log_threshold() {
    static LogLevel level = LogLevel::info;
    return level;
}

inline void log(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    static std::mutex mu;
    const char* tag = "info";
    switch (level) {
        case LogLevel::debug: tag = "debug"; break;
        case LogLevel::info: tag = "info"; break;
        case LogLevel::warn: tag = "warn"; break;
        case LogLevel::error: tag = "error"; break;
    }
    std::lock_guard<std::mutex> lock(mu);
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

inline void log_debug(const std::string& msg) { log(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log(LogLevel::warn, msg); }
inline void log_error(const std::string& msg) { log(LogLevel::error, msg); }

}  // namespace sqleval
