#include "fedkg/log.hpp"

#include <ctime>

namespace fedkg::log {

Level& threshold() {
    static Level level = Level::Warn;
    return level;
}

void set_level(Level level) { threshold() = level; }

Level parse_level(const std::string& name) {
    if (name == "debug") return Level::Debug;
    if (name == "info") return Level::Info;
    if (name == "warn" || name == "warning") return Level::Warn;
    if (name == "error") return Level::Error;
    if (name == "off" || name == "none") return Level::Off;
    return Level::Warn;
}

void write(Level level, const std::string& message) {
    static std::mutex mutex;
    const char* tag = "info";
    switch (level) {
        case Level::Debug: tag = "debug"; break;
        case Level::Info: tag = "info"; break;
        case Level::Warn: tag = "warn"; break;
        case Level::Error: tag = "error"; break;
        case Level::Off: return;
    }
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
    std::lock_guard<std::mutex> lock(mutex);
    std::fprintf(stderr, "%s %-5s %s\n", stamp, tag, message.c_str());
}

} // namespace fedkg::log
