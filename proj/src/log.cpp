#include "laneless/log.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

namespace laneless {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SIM_LOG");
    if (env == nullptr) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  const char* tag = level == LogLevel::Error
                        ? "error"
                        : (level == LogLevel::Info ? "info" : "debug");
  std::cerr << "[sim:" << tag << "] " << message << "\n";
}

}  // namespace laneless
