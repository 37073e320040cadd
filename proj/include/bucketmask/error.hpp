#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bucketmask {

enum class ErrorKind {
  Parse,        // malformed input text
  NotFound,     // a requested entity (chain, id) is absent
  Format,       // structurally invalid file (ragged MSA, empty file)
  Contract,     // precondition violated by the caller
  Mismatch,     // sequence/structure alignment below the identity floor
  Consistency,  // input disagrees with a supplied reference
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::Contract, message);
}

}  // namespace bucketmask
