#pragma once

#include <ostream>

namespace dmab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Subcommands:
//   run     --config <path> [--seed N] [--out-dir D] [--threads N] [--quiet]
//   gen-env --spec <path> --out <path> [--seed N] [--quiet]
//   regret  --matrix <path> --trajectory <path> [--segments S]
// Errors are reported as one JSON line on `err`:
//   {"error":"validation"|"runtime","message":"..."}
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dmab
