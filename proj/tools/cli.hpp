#pragma once

#include <iosfwd>

namespace joap {

/// Exit codes: 0 success, 1 usage or validation error, 2 runtime error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                 std::ostream& err);

}  // namespace joap
