#include "bucketmask/error.hpp"

namespace bucketmask {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::Format: return "format";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Mismatch: return "mismatch";
    case ErrorKind::Consistency: return "consistency";
  }
  return "unknown";
}

}  // namespace bucketmask
