#include "deers/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace deers {
namespace {

LogLevel parse_level() {
  const char* env = std::getenv("DEERS_LOG_LEVEL");
  if (env == nullptr) return LogLevel::kWarn;
  std::string v(env);
  if (v == "error") return LogLevel::kError;
  if (v == "warn") return LogLevel::kWarn;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  std::fprintf(stderr, "[deers][warn] unknown DEERS_LOG_LEVEL '%s', using warn\n", env);
  return LogLevel::kWarn;
}

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::kError:
      return "error";
    case LogLevel::kWarn:
      return "warn";
    case LogLevel::kInfo:
      return "info";
    case LogLevel::kDebug:
      return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

bool log_enabled(LogLevel level) {
  return static_cast<int>(level) <= static_cast<int>(log_level());
}

void log_message(LogLevel level, std::string_view message) {
  std::fprintf(stderr, "[deers][%s] %.*s\n", level_tag(level),
               static_cast<int>(message.size()), message.data());
}

}  // namespace deers
