#ifndef CMCHAIN_CLI_HPP
#define CMCHAIN_CLI_HPP

#include <string>
#include <vector>

namespace cmchain {

/// Scenario dispatcher behind the command-line binary.
/// Exit codes: 0 success, 1 invariant failure, 2 invalid input.
int cli_main(const std::vector<std::string>& args);

}  // namespace cmchain

#endif  // CMCHAIN_CLI_HPP
