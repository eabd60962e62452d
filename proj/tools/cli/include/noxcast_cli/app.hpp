#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "noxcast_cli/run_config.hpp"

namespace noxcast::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Commands understood by dispatch, in help order.
const std::vector<std::string>& commands();

/// Runs one command with an already-resolved configuration. Artifacts go to
/// config.out; a short human summary goes to `out`. Errors propagate.
void dispatch(const std::string& command, const RunConfig& config, std::ostream& out);

/// Full entry point: argument parsing, config loading, dispatch and error
/// reporting. Failures print one JSON object on `err` and return the exit
/// status (2 config, 3 data, 4 numeric).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace noxcast::cli
