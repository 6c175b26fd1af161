#pragma once

namespace hawkesdiv {

/**
 * Command-line entry point shared by the installed tool and the tests.
 *
 * Subcommands: solve, train --algo reinforce|actor-critic,
 * evaluate --policy pde|<checkpoint.json>, compare --checkpoint <file>,
 * sweep --param <name> --values v1,v2,...
 *
 * Every subcommand requires --config <file>; --seed overrides both the
 * training and evaluation seeds; the output directory resolves as
 * --output-dir flag > HAWKESDIV_OUTPUT_DIR env var > config output_dir.
 *
 * Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure.
 */
int cli_main(int argc, const char* const* argv);

}  // namespace hawkesdiv
