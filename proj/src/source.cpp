#include "repoctx/source.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "repoctx/error.hpp"

namespace repoctx {

std::uint32_t count_lines(std::string_view text) noexcept {
  std::uint32_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  if (!text.empty() && text.back() != '\n') ++lines;
  return lines;
}

std::string normalize_relative_path(std::string_view path) {
  std::string p(path);
  for (char& c : p) {
    if (c == '\\') c = '/';
  }
  if (!p.empty() && p.front() == '/') {
    throw std::invalid_argument("path is absolute: " + p);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= p.size()) {
    std::size_t slash = p.find('/', start);
    if (slash == std::string::npos) slash = p.size();
    std::string part = p.substr(start, slash - start);
    if (part == "..") {
      if (parts.empty()) throw std::invalid_argument("path escapes repository root: " + p);
      parts.pop_back();
    } else if (!part.empty() && part != ".") {
      parts.push_back(std::move(part));
    }
    start = slash + 1;
  }
  std::string out;
  for (const auto& part : parts) {
    if (!out.empty()) out += '/';
    out += part;
  }
  return out;
}

SourceFile SourceFile::from_text(std::string_view repo_relative_path, std::string text) {
  SourceFile file;
  file.repo_relative_path = normalize_relative_path(repo_relative_path);
  file.line_count = count_lines(text);
  file.text = std::move(text);
  return file;
}

std::size_t find_invalid_utf8(std::string_view text) noexcept {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::string_view::npos;
}

SourceFile read_source_file(const std::filesystem::path& root, const std::filesystem::path& relative) {
  const auto full = root / relative;
  std::ifstream in(full, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + full.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = std::move(buffer).str();
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) text.erase(0, 3);
  const std::string rel = normalize_relative_path(relative.generic_string());
  if (auto bad = find_invalid_utf8(text); bad != std::string_view::npos) {
    throw EncodingError(rel, bad);
  }
  return SourceFile::from_text(rel, std::move(text));
}

std::size_t offset_of(std::string_view text, Position pos) {
  std::size_t offset = 0;
  for (std::uint32_t line = 0; line < pos.line; ++line) {
    std::size_t nl = text.find('\n', offset);
    if (nl == std::string_view::npos) throw std::out_of_range("line " + std::to_string(pos.line + 1) + " is past the end of the file");
    offset = nl + 1;
  }
  std::size_t line_end = text.find('\n', offset);
  if (line_end == std::string_view::npos) line_end = text.size();
  return std::min<std::size_t>(offset + pos.column, line_end);
}

Position end_position(std::string_view text) noexcept {
  Position pos;
  for (char c : text) {
    if (c == '\n') {
      ++pos.line;
      pos.column = 0;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

std::uint32_t byte_column(std::string_view text, std::uint32_t line, std::uint32_t char_column) {
  const std::size_t start = offset_of(text, Position{line, 0});
  std::size_t i = start;
  std::uint32_t chars = 0;
  while (i < text.size() && text[i] != '\n' && chars < char_column) {
    ++i;
    while (i < text.size() && (static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) ++i;
    ++chars;
  }
  if (chars < char_column) throw std::out_of_range("column " + std::to_string(char_column + 1) + " is past the end of line " + std::to_string(line + 1));
  return static_cast<std::uint32_t>(i - start);
}

}  // namespace repoctx
