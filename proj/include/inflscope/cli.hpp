#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inflscope::cli {

enum ExitCode : int {
    kOk = 0,
    kUnexpected = 1,
    kConfigError = 2,
    kDataError = 3,
    kNumericalError = 4,
};

/// Runs one subcommand (`trajectory`, `centrality`, `robustness`,
/// `sectorcorr`, `optimize`, `synth`, `report`). `args` excludes the program
/// name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace inflscope::cli
