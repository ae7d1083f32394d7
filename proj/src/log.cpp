#include "rsp/log.hpp"

#include <cstdlib>
#include <string>

namespace rsp::log {

Level level() {
    static const Level cached = [] {
        const char* env = std::getenv("RSP_LOG");
        if (!env) return Level::error;
        const std::string v(env);
        if (v == "debug") return Level::debug;
        if (v == "info") return Level::info;
        if (v == "warn") return Level::warn;
        return Level::error;
    }();
    return cached;
}

namespace detail {

void emit(Level lvl, const std::string& msg) {
    const char* tag = lvl == Level::debug ? "debug" : lvl == Level::info ? "info" : "warn";
    std::cerr << "[rsp:" << tag << "] " << msg << "\n";
}

} // namespace detail

} // namespace rsp::log
