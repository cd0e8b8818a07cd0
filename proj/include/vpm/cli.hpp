#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vpm::cli {

// Runs one command line (without argv[0]). Writes results to out and
// warnings/errors to err. Returns 0 on success, 1 for domain errors
// (reported as "error: <Name>: <detail>"), 2 for usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vpm::cli
