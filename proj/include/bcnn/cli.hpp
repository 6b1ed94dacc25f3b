#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace bcnn::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kRuntime = 2;
inline constexpr int kGradcheckFailed = 3;

// args excludes the program name, e.g. {"synth", "--out", "d", "--per-class", "10"}.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace bcnn::cli
