#pragma once

// Command-line driver: run, analyze, compare, validate-bench, reproduce-paper.
//
// Exit codes: 0 ok, 2 usage / bad flag values, 3 bad input data (bench or
// CSV), 4 internal invariant violation.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace telesim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitInternal = 4;

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Unicode block sparkline of `values`, scaled to their max.
std::string sparkline(const std::vector<double>& values);

/// 64-bit FNV-1a, used to fingerprint bench bytes in run manifests.
std::uint64_t fnv1a(std::string_view bytes);

using Manifest = std::map<std::string, std::string>;

Manifest read_manifest(std::istream& in);
void write_manifest(std::ostream& out, const Manifest& m);

}  // namespace telesim::cli
