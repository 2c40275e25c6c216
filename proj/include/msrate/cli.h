#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "msrate/linalg.h"

namespace msrate::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `msrate` tool: check | bounds | sweep | simulate | rate.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parallelism cap from MSRATE_THREADS (0 = sequential). Unset or invalid
/// falls back to the hardware concurrency.
unsigned thread_budget();

/// 17 significant digits; non-finite values as inf, -inf, nan.
std::string format_number(double v);

/// One row per gain row, comma separated, no header.
void write_gain_csv(const std::filesystem::path& path, const Matrix& K);
Matrix read_gain_csv(const std::filesystem::path& path);

}  // namespace msrate::cli
