#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace repoctx {

/// A 0-based (line, byte column) location. Tabs occupy one column.
struct Position {
  std::uint32_t line = 0;
  std::uint32_t column = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

/// One file of the analyzed repository.
struct SourceFile {
  std::string repo_relative_path;
  std::string text;
  std::uint32_t line_count = 0;

  /// Builds a file from in-memory text; normalizes the path and counts lines.
  /// Throws std::invalid_argument if the path escapes the repository root.
  static SourceFile from_text(std::string_view repo_relative_path, std::string text);
};

/// Number of newline-delimited lines; a trailing newline does not open a new line.
std::uint32_t count_lines(std::string_view text) noexcept;

/// Forward-slash, dot-free relative path. Throws std::invalid_argument when
/// the path is absolute or climbs above the root with "..".
std::string normalize_relative_path(std::string_view path);

/// Reads `root / relative` as UTF-8 (a leading BOM is dropped).
/// Throws EncodingError for invalid bytes and std::runtime_error when unreadable.
SourceFile read_source_file(const std::filesystem::path& root, const std::filesystem::path& relative);

/// Offset of the first invalid byte, or npos when `text` is valid UTF-8.
std::size_t find_invalid_utf8(std::string_view text) noexcept;

/// Byte offset of a position inside `text`, clamped to the end of its line.
/// Throws std::out_of_range if the line does not exist.
std::size_t offset_of(std::string_view text, Position pos);

/// Position just past the last byte of `text`.
Position end_position(std::string_view text) noexcept;

/// Byte column of the `char_column`-th code point (0-based) on `line`.
std::uint32_t byte_column(std::string_view text, std::uint32_t line, std::uint32_t char_column);

}  // namespace repoctx
