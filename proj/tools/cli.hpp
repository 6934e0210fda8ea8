#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace moodsense::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kInternalError = 3,
};

/// Parses `args` (args[0] is the program name) and runs one subcommand.
/// Diagnostics go to `err`; listings such as validation results go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace moodsense::cli
