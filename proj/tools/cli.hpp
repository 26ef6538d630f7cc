#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sicra::cli {

// Runs the command line front end on already-split arguments (program name
// excluded). Normal output goes to `out` unless --out redirects it to a file;
// diagnostics and the compare summary go to `err`.
//
// Exit codes: 0 success, 1 comparison bound exceeded in strict mode,
// 2 configuration or usage error.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace sicra::cli
