#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stdisc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stdisc::cli
