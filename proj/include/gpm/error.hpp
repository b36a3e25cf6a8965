#pragma once

#include <stdexcept>
#include <string>

namespace gpm {

// Error categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  usage,
  io,
  schema,
  parse,
  balance,
  domain,
  rank,
  numeric,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::parse: return "parse";
    case ErrorKind::balance: return "balance";
    case ErrorKind::domain: return "domain";
    case ErrorKind::rank: return "rank";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::schema: return 4;
    case ErrorKind::parse: return 5;
    case ErrorKind::balance: return 6;
    case ErrorKind::domain: return 7;
    case ErrorKind::rank: return 8;
    case ErrorKind::numeric: return 9;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace gpm
