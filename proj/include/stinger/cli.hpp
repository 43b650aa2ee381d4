#pragma once

#include <iosfwd>

namespace stinger {

/// Entry point of the `stinger` tool. Returns 0 on success, 1 on a usage or
/// validation error, 2 on a runtime failure.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stinger
