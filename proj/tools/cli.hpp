#pragma once

#include <string>
#include <vector>

namespace pinnlab::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_io = 3,
    exit_numeric = 4,
};

/// Runs one command line. args[0] is the program name.
[[nodiscard]] int run(const std::vector<std::string>& args);

/// Git blob hash ("blob <size>\0" + content, SHA-1, lowercase hex).
[[nodiscard]] std::string git_blob_hash(const std::string& content);

}  // namespace pinnlab::cli
