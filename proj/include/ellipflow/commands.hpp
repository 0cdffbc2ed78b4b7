#pragma once

#include <ostream>
#include <string>

#include "ellipflow/config.hpp"

namespace ellipflow {

/// CSV-producing workflows behind the CLI subcommands. Each validates the
/// sections it needs and writes a header row plus data rows (17 significant
/// digits); commands return a process exit code (0 success, 3 when a
/// crosscheck level broke down but a partial report was written).
int cmd_integrate(const RunConfig& cfg, std::ostream& out);
int cmd_classify_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_field(const RunConfig& cfg, std::ostream& out);
int cmd_verify_residual(const RunConfig& cfg, std::ostream& out);
int cmd_mass_check(const RunConfig& cfg, std::ostream& out);
// `out_path` (empty = stdout) is used to derive snapshot file names.
int cmd_crosscheck(const RunConfig& cfg, std::ostream& out, const std::string& out_path);

}  // namespace ellipflow
