#ifndef ERGOFLOW_CLI_HPP
#define ERGOFLOW_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace ergoflow::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitConfig = 2;

// Runs one command line (without the program name). Reports go to `out` or,
// with --out DIR, to files in DIR; errors go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace ergoflow::cli

#endif
