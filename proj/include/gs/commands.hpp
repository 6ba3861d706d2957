#pragma once

#include <string>

#include "gs/io.hpp"

namespace gs {

// Subcommand bodies, shared by the CLI binary and the end-to-end tests.
// Each writes its artifacts under cfg.paths.out and prints a short
// summary; failures surface as exceptions (ConfigError/ParseError for
// exit code 2, anything else for 1).

void cmd_fit_motor(const RunConfig& cfg);
void cmd_gen_cycle(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_compare(const RunConfig& cfg);
void cmd_bench(const RunConfig& cfg);

}  // namespace gs
