// log.hpp
// Leveled logging to stderr. The level comes from CASLAB_LOG
// (error | info | debug, default error).

#pragma once

#include <string>

namespace caslab {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level();
void set_log_level(LogLevel level);
// Parses a level name; returns false for unknown names.
bool parse_log_level(const std::string& name, LogLevel& out);

void log_message(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log_message(LogLevel::error, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }

}  // namespace caslab
