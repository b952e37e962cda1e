#pragma once

#include <stdexcept>
#include <string>

namespace maebound {

enum class ErrorKind {
  Parameter,
  Dimension,
  Shape,
  Numeric,
  Format,
  Io,
  Mode,
  Capability,
  Config,
};

/// Every failure raised by the core library carries a kind so the C boundary
/// can map it onto a stable status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace maebound
