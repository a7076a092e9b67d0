#pragma once

namespace pf {

enum class LogLevel : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from POSEFUSE_LOG (name or digit); default is "warn".
LogLevel log_level();
void set_log_level(LogLevel lvl);

void log_msg(LogLevel lvl, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

#define PF_LOG_ERROR(...) ::pf::log_msg(::pf::LogLevel::Error, __VA_ARGS__)
#define PF_LOG_WARN(...) ::pf::log_msg(::pf::LogLevel::Warn, __VA_ARGS__)
#define PF_LOG_INFO(...) ::pf::log_msg(::pf::LogLevel::Info, __VA_ARGS__)
#define PF_LOG_DEBUG(...) ::pf::log_msg(::pf::LogLevel::Debug, __VA_ARGS__)

}  // namespace pf
