#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace heterotest {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path);

/// Writes via a sibling temporary file and rename, so readers never see a
/// partially written file.
void write_text_file(const fs::path& path, std::string_view content);

/// ISO-8601 UTC, second resolution: `2026-10-16T18:05:00Z`.
std::string utc_timestamp(std::chrono::system_clock::time_point when);
inline std::string utc_timestamp() { return utc_timestamp(std::chrono::system_clock::now()); }

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

/// Percent with exactly one decimal, e.g. `70.0`.
std::string format_percent(double value);

std::string xml_escape(std::string_view text, bool attribute);
std::string html_escape(std::string_view text);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::vector<std::string> split_lines(std::string_view text);

bool starts_with(std::string_view text, std::string_view prefix);

/// `path` relative to `base` (both made absolute first), forward slashes.
std::string portable_relative(const fs::path& path, const fs::path& base);

/// Maps an arbitrary string onto `[A-Za-z0-9_]`, usable in file names and
/// identifiers.
std::string sanitize_identifier(std::string_view text);

/// Milliseconds elapsed since `start` on the steady clock.
std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start);

}  // namespace heterotest
