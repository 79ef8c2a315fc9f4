#pragma once

#include <iosfwd>

namespace mmv {

// Exit codes: 0 success, 2 configuration / usage error, 3 format error,
// 1 any other failure. Diagnostics go to `err`, CSV (when no --output is
// given) to `out`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmv
