#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace survcontour::cli {

// Exit codes of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kNonconvergence = 3;

// Runs `survcontour <args...>` (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace survcontour::cli
