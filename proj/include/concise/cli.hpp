#pragma once

#include "concise/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace concise::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRecordFailures = 1;  // some records failed, or an output was not written
inline constexpr int kExitUsage = 2;           // bad flags, config or input; nothing was called

/// Runs one command line. `args` excludes the program name. Human-readable
/// progress goes to `err`, summaries and rendered tables to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env);

}  // namespace concise::cli
