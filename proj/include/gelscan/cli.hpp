#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gelscan {

/// Entry point of the `gelscan` executable, split out so tests can drive it
/// in-process. `args` excludes the program name. Returns the exit status:
/// 0 on success, exit_code_for(code) for library errors, 2 for bad usage.
///
///   gelscan analyze --input gel.png [--out DIR] [pipeline flags]
///   gelscan synth --seed N [--preset clean|faint] --out gel.png
///   gelscan serve [--host H] [--port P] [--reports DIR] [--static DIR]
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gelscan
