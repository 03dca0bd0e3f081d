#pragma once

#include "mvsde/config.hpp"
#include "mvsde/error.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace mvsde {

// 0 success, 2 config, 3 blow-up, 4 non-convergence, 1 anything else.
[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

// File name -> content, produced in full before anything is written.
using Artifacts = std::map<std::string, std::string>;

// Runs one subcommand and returns its artifacts, manifest included.
// Progress and summaries go to `log`.
[[nodiscard]] Artifacts run(const RunConfig& config, std::ostream& log);

// Writes each artifact to a temporary name in `dir`, then renames them all.
void commit_artifacts(const std::string& dir, const Artifacts& artifacts);

// Full command line: parse, run, write. Returns the process exit status.
[[nodiscard]] int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mvsde
