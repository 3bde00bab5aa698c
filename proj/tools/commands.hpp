#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inheritlab::cli {

enum ExitCode { Pass = 0, ToleranceFailure = 1, UsageError = 2 };

// args excludes the program name. Reports go to `out` as JSON, diagnostics to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// Line-based key=value reader for --config. Blank lines and '#' comments are
// skipped; values may be quoted or a bracketed comma list.
std::vector<std::pair<std::string, std::vector<std::string>>> read_config(const std::string& path);

}  // namespace inheritlab::cli
