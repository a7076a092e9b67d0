#include "error.hpp"

#include <vector>

namespace pf {

const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::InvalidArgument: return "invalid_argument";
    case Status::Io: return "io_error";
    case Status::Format: return "format_error";
    case Status::Infeasible: return "infeasible";
    case Status::Bounds: return "bounds_error";
    case Status::Runtime: return "runtime_error";
  }
  return "unknown";
}

void fail(Status code, const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list copy;
  va_copy(copy, args);
  int n = std::vsnprintf(nullptr, 0, fmt, copy);
  va_end(copy);
  std::string msg(n > 0 ? n : 0, '\0');
  if (n > 0) std::vsnprintf(msg.data(), msg.size() + 1, fmt, args);
  va_end(args);
  throw Error(code, msg);
}

}  // namespace pf
