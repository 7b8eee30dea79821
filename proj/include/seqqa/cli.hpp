#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seqqa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand (`args` excludes the program name): preprocess,
/// build-vocab, train, eval, chat, serve, gradcheck. Errors go to `err` as a
/// single JSON line {"error": {"kind", "message"}}.
int dispatch(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace seqqa
