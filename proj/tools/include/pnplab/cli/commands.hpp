#pragma once

#include <iosfwd>

#include "pnplab/cli/pipeline.hpp"
#include "pnplab/cli/run_config.hpp"

namespace pnp::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailed = 1,  ///< repro criteria not met, or an internal error
    kExitConfig = 2,
    kExitNumeric = 3,
};

/// Writes model.ckpt, loss.csv, loss.svg and config.json under ctx.out.
void cmd_train(const RunConfig& config, const Context& ctx);
/// Writes samples.srvgrid, trajectory.srvgrid (when logging), nfe.csv and config.json under ctx.out.
void cmd_sample(const RunConfig& config, const Context& ctx);
/// Writes metrics.csv, paired.csv (with a baseline), SVG plots and config.json under ctx.out.
void cmd_eval(const RunConfig& config, const Context& ctx);

/// Full command line: parses arguments, runs the command, maps failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pnp::cli
