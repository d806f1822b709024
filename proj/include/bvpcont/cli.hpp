#pragma once

namespace bvpcont::cli {

/// Exit statuses of the command-line front end.
enum ExitCode : int {
  kOk = 0,
  kNumericalFailure = 1,
  kCertifiedNoSolution = 2,
  kConfigError = 64,
  kIoError = 74,
};

/// Parses the command line, runs the requested computation and writes
/// result.json plus any CSV outputs into the output directory.
int run(int argc, char** argv);

}  // namespace bvpcont::cli
