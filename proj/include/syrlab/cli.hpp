#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace syrlab::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

/// Runs one subcommand. args excludes the program name. Data goes to --out
/// (written atomically) with the run manifest on `out`; without --out the
/// data goes to `out` and the manifest to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

std::string sha256_hex(std::string_view bytes);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, std::string_view bytes);

}  // namespace syrlab::cli
