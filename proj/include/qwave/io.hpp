#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace qwave::io {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

/// Empty string for a missing value, format_double otherwise.
std::string format_optional(const std::optional<double>& x);

/// Creates `dir` (and parents); throws IoError naming the path.
void ensure_directory(const std::filesystem::path& dir);

/// Writes `content` atomically enough for our purposes (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

} // namespace qwave::io
