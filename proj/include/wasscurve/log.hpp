#ifndef WASSCURVE_LOG_HPP
#define WASSCURVE_LOG_HPP

#include <string>

namespace wasscurve {

enum class LogLevel { quiet = 0, error = 1, warn = 2, info = 3, debug = 4 };

/// Level read once from WASSCURVE_LOG (quiet|error|warn|info|debug); warn by default.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& message);

inline void log_warn(const std::string& m) { log_message(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }

}  // namespace wasscurve

#endif  // WASSCURVE_LOG_HPP
