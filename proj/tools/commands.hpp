#pragma once

#include <iosfwd>

namespace caws::cli {

/// Entry point of the `caws` tool: generate | run | sweep | bound | selftest.
/// Returns the process exit code; diagnostics go to `err` as one line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace caws::cli
