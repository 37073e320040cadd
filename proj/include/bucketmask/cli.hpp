#pragma once

#include <iosfwd>

namespace bucketmask::cli {

// Exit codes: 0 success, 1 internal error, 2 usage or contract error. Errors
// are reported on `err` as a single JSON object {"error", "message"}.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bucketmask::cli
