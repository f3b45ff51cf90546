#pragma once

// Minimal CSV plumbing: comma splitting, locale-free number parsing and
// shortest round-trip number formatting.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace caws::csv {

std::vector<std::string_view> split(std::string_view line);

/// Parses a full field as a double; throws caws::Error mentioning `line_no`.
double parse_double(std::string_view field, std::size_t line_no);
std::uint64_t parse_uint(std::string_view field, std::size_t line_no);

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

/// Writes through `writer` into `<path>.tmp`, then renames onto `path`.
/// A failed write leaves no file at `path`.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

}  // namespace caws::csv
