#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mekan {

/// Subcommands: train, eval, forecast, continual, bench, export-activations.
/// `args` excludes the program name. Returns the process exit code: 0 on
/// success, 1 on a runtime failure, 2 on a usage or config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mekan
