#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trajcast {

// Shortest decimal representation that round-trips the exact double.
// Used for every CSV number so reports are byte-reproducible.
std::string format_double(double v);

// Strict double parse of a full token; throws IngestError on trailing garbage.
double parse_double(std::string_view token);

bool try_parse_double(std::string_view token, double& out);

// Splits one CSV line on commas. No quoting support; the formats written by
// this project never need it.
std::vector<std::string> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// FNV-1a 64-bit content hash, hex encoded. Used by manifests and config hashing.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

} // namespace trajcast
