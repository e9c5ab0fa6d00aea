#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace riskgraph::io {

/// Shortest decimal representation that round-trips through a double
/// (std::to_chars). Keeps every numeric artifact byte-stable across runs.
std::string format_double(double v);

/// Strict full-string double parse; throws SchemaError on garbage.
double parse_double(std::string_view s);

/// Strict full-string integer parse; throws SchemaError on garbage.
long long parse_int(std::string_view s);

/// FNV-1a 64-bit hash, rendered as 16 lowercase hex digits. Used as the
/// config digest embedded in every pipeline artifact.
std::uint64_t fnv1a64(std::string_view data);
std::string digest_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Split one CSV line on commas. No quoting dialect: fields in this
/// project's CSVs are plain numbers and identifiers. Trailing \r stripped.
std::vector<std::string> split_csv_line(std::string_view line);

/// Split text into lines; tolerates \n and \r\n; drops a trailing blank.
std::vector<std::string> split_lines(std::string_view text);

} // namespace riskgraph::io
