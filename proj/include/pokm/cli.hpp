#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pokm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

// Default output directory when --out is not given.
inline constexpr const char* kOutDirEnv = "POKM_OUT_DIR";

// args excludes the program name: {"cluster", "--input", "x.csv", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pokm::cli
