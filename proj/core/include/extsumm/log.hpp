#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace extsumm {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from EXTSUMM_LOG_LEVEL (error|warn|info|debug), default warn.
inline LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("EXTSUMM_LOG_LEVEL");
        if (env == nullptr) return LogLevel::Warn;
        if (std::strcmp(env, "error") == 0) return LogLevel::Error;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

inline void log_msg(LogLevel lvl, const char* tag, const std::string& msg) {
    if (lvl <= log_level()) {
        std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
    }
}

inline void log_error(const std::string& msg) { log_msg(LogLevel::Error, "error", msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::Warn, "warn", msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::Info, "info", msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::Debug, "debug", msg); }

}  // namespace extsumm
