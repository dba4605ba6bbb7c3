#ifndef BURSTPACE_CLI_HPP
#define BURSTPACE_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace burstpace {

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 2 on a usage error and 1 when the command itself fails.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace burstpace

#endif // BURSTPACE_CLI_HPP
