#pragma once

#include <string>
#include <vector>

namespace mbse::cli {

// Entry point behind the `mbse` binary. Commands: score, ensemble, distill,
// filter-gen, stats, validate. Returns the process exit status: 0 success,
// 1 runtime/usage errors, 2 unknown command.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

}  // namespace mbse::cli
