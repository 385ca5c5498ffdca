#pragma once

#include <ostream>

namespace screening {

/// Entry point of the `screen` tool. Errors are reported on `err` as a single
/// line "error[<category>]: <message>" with a nonzero return value.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace screening
