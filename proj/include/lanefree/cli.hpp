#pragma once

// The `lanefree` command line: simulate, geometry, verify, export.
//
// Exit codes: 0 success; 1 bad input (config, arguments, malformed trace);
// 2 a runtime monitor or verification check failed; 3 the integrator could
// not stay inside the admissible set.

#include <iosfwd>

namespace lanefree::cli {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitMonitor = 2;
constexpr int kExitIntegrity = 3;

/// Output directory used by `simulate` when --out is not given.
constexpr const char* kOutputDirEnv = "LANEFREE_OUTPUT_DIR";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lanefree::cli
