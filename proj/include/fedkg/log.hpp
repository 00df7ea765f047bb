#pragma once

#include <chrono>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <string>

namespace fedkg::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

Level& threshold();
void set_level(Level level);
Level parse_level(const std::string& name);

// Writes one line to stderr: "<iso-timestamp> <level> <msg>".
void write(Level level, const std::string& message);

namespace detail {
inline void append(std::ostringstream&) {}
template <typename T, typename... Rest>
void append(std::ostringstream& out, T&& head, Rest&&... rest) {
    out << head;
    append(out, std::forward<Rest>(rest)...);
}
} // namespace detail

template <typename... Args>
void debug(Args&&... args) {
    if (threshold() > Level::Debug) return;
    std::ostringstream out;
    detail::append(out, std::forward<Args>(args)...);
    write(Level::Debug, out.str());
}

template <typename... Args>
void info(Args&&... args) {
    if (threshold() > Level::Info) return;
    std::ostringstream out;
    detail::append(out, std::forward<Args>(args)...);
    write(Level::Info, out.str());
}

template <typename... Args>
void warn(Args&&... args) {
    if (threshold() > Level::Warn) return;
    std::ostringstream out;
    detail::append(out, std::forward<Args>(args)...);
    write(Level::Warn, out.str());
}

template <typename... Args>
void error(Args&&... args) {
    if (threshold() > Level::Error) return;
    std::ostringstream out;
    detail::append(out, std::forward<Args>(args)...);
    write(Level::Error, out.str());
}

} // namespace fedkg::log
