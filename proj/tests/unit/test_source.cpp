#include <gtest/gtest.h>

#include <random>

#include "repoctx/error.hpp"
#include "repoctx/source.hpp"
#include "test_support.hpp"

using namespace repoctx;
using repoctx::testing::TempDir;

TEST(CountLines, TrailingNewlineDoesNotOpenALine) {
  EXPECT_EQ(count_lines(""), 0u);
  EXPECT_EQ(count_lines("a"), 1u);
  EXPECT_EQ(count_lines("a\n"), 1u);
  EXPECT_EQ(count_lines("a\nb"), 2u);
  EXPECT_EQ(count_lines("\n\n"), 2u);
}

TEST(CountLines, MatchesSplitOracle) {
  std::mt19937 rng(7);
  for (int round = 0; round < 200; ++round) {
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int i = 0; i < n; ++i) s += "ab\n"[std::uniform_int_distribution<int>(0, 2)(rng)];
    // Oracle: number of non-empty pieces when every line is newline-terminated.
    std::uint32_t expect = 0;
    std::string cur;
    bool open = false;
    for (char c : s) {
      open = true;
      if (c == '\n') {
        ++expect;
        open = false;
      }
    }
    if (open) ++expect;
    EXPECT_EQ(count_lines(s), expect) << s;
  }
}

TEST(NormalizePath, ForwardSlashesAndDots) {
  EXPECT_EQ(normalize_relative_path("a\\b/./c.py"), "a/b/c.py");
  EXPECT_EQ(normalize_relative_path("a/x/../c.py"), "a/c.py");
  EXPECT_EQ(normalize_relative_path("./m.py"), "m.py");
}

TEST(NormalizePath, RejectsEscapes) {
  EXPECT_THROW(normalize_relative_path("../m.py"), std::invalid_argument);
  EXPECT_THROW(normalize_relative_path("a/../../m.py"), std::invalid_argument);
  EXPECT_THROW(normalize_relative_path("/abs/m.py"), std::invalid_argument);
  EXPECT_THROW(SourceFile::from_text("../x.py", ""), std::invalid_argument);
}

TEST(SourceFile, FromTextCountsLines) {
  auto f = SourceFile::from_text("pkg//m.py", "x = 1\ny = 2\n");
  EXPECT_EQ(f.repo_relative_path, "pkg/m.py");
  EXPECT_EQ(f.line_count, 2u);
}

TEST(Utf8, Validation) {
  EXPECT_EQ(find_invalid_utf8("plain"), std::string_view::npos);
  EXPECT_EQ(find_invalid_utf8("caf\xC3\xA9"), std::string_view::npos);
  EXPECT_EQ(find_invalid_utf8("\xF0\x9F\x98\x80"), std::string_view::npos);
  EXPECT_EQ(find_invalid_utf8("ab\xFF"), 2u);
  EXPECT_EQ(find_invalid_utf8("\xC0\xAF"), 0u);      // overlong
  EXPECT_EQ(find_invalid_utf8("\xED\xA0\x80"), 0u);  // surrogate
  EXPECT_EQ(find_invalid_utf8("x\xE2\x82"), 1u);     // truncated
}

TEST(ReadSource, DropsBomAndRejectsBadBytes) {
  TempDir dir;
  repoctx::testing::write_text(dir.path() / "ok.py", "\xEF\xBB\xBFx = 1\n");
  repoctx::testing::write_text(dir.path() / "sub/bad.py", "x = '\xFF'\n");
  auto f = read_source_file(dir.path(), "ok.py");
  EXPECT_EQ(f.text, "x = 1\n");
  try {
    read_source_file(dir.path(), "sub/bad.py");
    FAIL() << "expected EncodingError";
  } catch (const EncodingError& e) {
    EXPECT_EQ(e.path(), "sub/bad.py");
    EXPECT_EQ(e.offset(), 5u);
  }
  EXPECT_THROW(read_source_file(dir.path(), "missing.py"), std::runtime_error);
}

TEST(Positions, OffsetsAndEnd) {
  const std::string t = "ab\ncde\n\nf";
  EXPECT_EQ(offset_of(t, {0, 0}), 0u);
  EXPECT_EQ(offset_of(t, {1, 2}), 5u);
  EXPECT_EQ(offset_of(t, {1, 99}), 6u);  // clamped to line end
  EXPECT_EQ(offset_of(t, {3, 1}), 9u);
  EXPECT_THROW(offset_of(t, {4, 0}), std::out_of_range);
  EXPECT_EQ(end_position(t), (Position{3, 1}));
  EXPECT_EQ(end_position(""), (Position{0, 0}));
}

TEST(Positions, ByteColumnCountsCodePoints) {
  const std::string t = "x = 'caf\xC3\xA9'\ny";
  EXPECT_EQ(byte_column(t, 0, 9), 10u);
  EXPECT_EQ(byte_column(t, 0, 10), 11u);
  EXPECT_THROW(byte_column(t, 1, 2), std::out_of_range);
}
