#pragma once

#include <iostream>
#include <sstream>

namespace rsp::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Reads RSP_LOG={error,info,debug} once; unknown values fall back to error.
Level level();

namespace detail {
void emit(Level lvl, const std::string& msg);
}

template <typename... Args>
void warn(Args&&... args) {
    if (level() < Level::warn) return;
    std::ostringstream os;
    (os << ... << args);
    detail::emit(Level::warn, os.str());
}

template <typename... Args>
void info(Args&&... args) {
    if (level() < Level::info) return;
    std::ostringstream os;
    (os << ... << args);
    detail::emit(Level::info, os.str());
}

template <typename... Args>
void debug(Args&&... args) {
    if (level() < Level::debug) return;
    std::ostringstream os;
    (os << ... << args);
    detail::emit(Level::debug, os.str());
}

} // namespace rsp::log
