#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace sis::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Read once from SIS_LOG (error|warn|info|debug); defaults to warn.
inline Level threshold() {
    static const Level level = [] {
        const char* env = std::getenv("SIS_LOG");
        if (env == nullptr) return Level::Warn;
        const std::string_view v(env);
        if (v == "error") return Level::Error;
        if (v == "info") return Level::Info;
        if (v == "debug") return Level::Debug;
        return Level::Warn;
    }();
    return level;
}

inline void write(Level level, std::string_view msg) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    static std::mutex mutex;
    static constexpr std::string_view tags[] = {"error", "warn", "info", "debug"};
    std::lock_guard lock(mutex);
    std::cerr << "[sis " << tags[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void warn(std::string_view msg) { write(Level::Warn, msg); }
inline void info(std::string_view msg) { write(Level::Info, msg); }
inline void debug(std::string_view msg) { write(Level::Debug, msg); }

} // namespace sis::log
