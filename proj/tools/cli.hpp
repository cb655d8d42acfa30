#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bpi::cli {

// Runs one command line (without the program name). Exit codes: 0 success,
// 1 impossible evidence, 2 usage or input error.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace bpi::cli
