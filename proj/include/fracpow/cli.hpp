// Command-line front end. Exit codes: 0 accepted or succeeded, 1 mathematical
// rejection or construction failure, 2 usage, parse or I/O error.

#ifndef FRACPOW_CLI_HPP
#define FRACPOW_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fracpow {

inline constexpr int kExitAccepted = 0;
inline constexpr int kExitRejected = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation; args exclude the program name. Certificates and
/// machine-readable verdicts go to `out`, progress and summaries to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fracpow

#endif  // FRACPOW_CLI_HPP
