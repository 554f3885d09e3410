#pragma once

#include <iosfwd>

namespace mret::cli {

/// Exit codes: 0 success, 1 validation/contract/usage error, 2 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mret::cli
