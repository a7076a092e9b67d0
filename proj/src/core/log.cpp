#include "log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace pf {

namespace {

LogLevel parse_env_level() {
  const char* env = std::getenv("POSEFUSE_LOG");
  if (!env || !*env) return LogLevel::Warn;
  if (!std::strcmp(env, "error") || !std::strcmp(env, "0")) return LogLevel::Error;
  if (!std::strcmp(env, "warn") || !std::strcmp(env, "1")) return LogLevel::Warn;
  if (!std::strcmp(env, "info") || !std::strcmp(env, "2")) return LogLevel::Info;
  if (!std::strcmp(env, "debug") || !std::strcmp(env, "3")) return LogLevel::Debug;
  return LogLevel::Warn;
}

LogLevel g_level = parse_env_level();
std::mutex g_mutex;

const char* level_tag(LogLevel lvl) {
  switch (lvl) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return g_level; }

void set_log_level(LogLevel lvl) { g_level = lvl; }

void log_msg(LogLevel lvl, const char* fmt, ...) {
  if (static_cast<int>(lvl) > static_cast<int>(g_level)) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::fprintf(stderr, "[%s] ", level_tag(lvl));
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

}  // namespace pf
