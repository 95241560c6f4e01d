#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tajweed::cli {

/// Parses argv and runs one subcommand. Data goes to `out`, diagnostics to
/// `err`. Returns 0 on success, otherwise the failing ErrorCode's value
/// (2 for usage errors).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tajweed::cli
