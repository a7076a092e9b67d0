#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace pf {

// Mirrors pf_status in the public C header; capi.cpp static_asserts the values.
enum class Status : int {
  Ok = 0,
  InvalidArgument = 1,
  Io = 2,
  Format = 3,
  Infeasible = 4,
  Bounds = 5,
  Runtime = 6,
};

const char* status_name(Status s);

class Error : public std::runtime_error {
 public:
  Error(Status code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Status code() const { return code_; }

 private:
  Status code_;
};

[[noreturn]] void fail(Status code, const char* fmt, ...);

inline void require(bool cond, Status code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace pf
