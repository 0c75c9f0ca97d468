#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgr {

/// Subcommands: ingest, filter, train, evaluate, predict, pipeline, synth.
/// Returns 0 on success, 1 on a validation or runtime failure and 2 on a
/// usage error. Log lines and the single `error: ...` line go to `err`.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_subcommand(int argc, char** argv);

}  // namespace kgr
