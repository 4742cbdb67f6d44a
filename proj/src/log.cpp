#include "panens/log.hpp"

#include <cstdlib>
#include <cstring>
#include <mutex>

namespace panens::log {

namespace {

Level parse_env() {
    const char* v = std::getenv("PANENS_LOG");
    if (!v) return Level::warn;
    if (std::strcmp(v, "off") == 0) return Level::off;
    if (std::strcmp(v, "error") == 0) return Level::error;
    if (std::strcmp(v, "warn") == 0) return Level::warn;
    if (std::strcmp(v, "info") == 0) return Level::info;
    if (std::strcmp(v, "debug") == 0) return Level::debug;
    return Level::warn;
}

const char* tag(Level lvl) {
    switch (lvl) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
        default: return "?";
    }
}

std::mutex g_mutex;

}  // namespace

Level level() {
    static Level lvl = parse_env();
    return lvl;
}

void write(Level lvl, const std::string& msg) {
    if (lvl > level() || lvl == Level::off) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[panens %s] %s\n", tag(lvl), msg.c_str());
}

}  // namespace panens::log
