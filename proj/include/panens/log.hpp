#pragma once

#include <cstdio>
#include <string>

namespace panens::log {

// Level comes from the PANENS_LOG environment variable:
// off | error | warn | info (default) | debug
enum class Level { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

Level level();

void write(Level lvl, const std::string& msg);

inline void error(const std::string& msg) { write(Level::error, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void debug(const std::string& msg) { write(Level::debug, msg); }

}  // namespace panens::log
