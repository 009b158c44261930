#pragma once

#include <stdexcept>
#include <string>

namespace smuc {

// Error taxonomy: `User` covers malformed inputs and domain misuse (CLI exit 1),
// `Internal` covers broken invariants that indicate a bug (CLI exit 2).
enum class ErrorKind {
  Syntax,
  Schema,
  TypeMismatch,
  UnknownName,
  NotASemiring,
  NoLub,
  UndefRead,
  NodeSetMismatch,
  InfiniteChain,
  FuelExhausted,
  BadArgument,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  bool internal() const { return kind_ == ErrorKind::Internal; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace smuc
