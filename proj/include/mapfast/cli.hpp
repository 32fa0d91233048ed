#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mapfast {

// Exit codes: 0 success, 1 domain failure (unsolved, empty dataset, bad
// training setup), 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

// Environment variable naming a default JSON config file.
inline constexpr const char* kConfigEnv = "MAPFAST_CONFIG";

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mapfast
