#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ergmkit::cli {

// Exit codes: 0 success, 1 input error, 2 statistical nonconvergence.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ergmkit::cli
