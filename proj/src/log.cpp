#include "wasscurve/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace wasscurve {

namespace {

LogLevel parse_level(const char* s) {
  if (s == nullptr) return LogLevel::warn;
  const std::string v(s);
  if (v == "quiet" || v == "0") return LogLevel::quiet;
  if (v == "error" || v == "1") return LogLevel::error;
  if (v == "info" || v == "3") return LogLevel::info;
  if (v == "debug" || v == "4") return LogLevel::debug;
  return LogLevel::warn;
}

std::atomic<int>& level_storage() {
  static std::atomic<int> level{static_cast<int>(parse_level(std::getenv("WASSCURVE_LOG")))};
  return level;
}

const char* tag(LogLevel level) {
  switch (level) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    case LogLevel::debug: return "debug";
    default: return "";
  }
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_storage().load()); }

void set_log_level(LogLevel level) { level_storage().store(static_cast<int>(level)); }

void log_message(LogLevel level, const std::string& message) {
  if (level == LogLevel::quiet || static_cast<int>(level) > level_storage().load()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[wasscurve:" << tag(level) << "] " << message << '\n';
}

}  // namespace wasscurve
