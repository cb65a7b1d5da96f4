#include <gtest/gtest.h>

#include <random>

#include "repoctx/error.hpp"
#include "repoctx/syntax.hpp"
#include "test_support.hpp"

using namespace repoctx;
using repoctx::testing::source;

TEST(Parse, EmptyFile) {
  auto tree = parse(source(""));
  EXPECT_FALSE(tree.has_errors());
  EXPECT_TRUE(tree.root().is("module"));
  EXPECT_EQ(tree.root().named_children().size(), 0u);
  int visits = 0;
  walk(tree, [&](const SyntaxNode&) { ++visits; });
  EXPECT_EQ(visits, 1);
}

TEST(Parse, AssignmentShape) {
  auto tree = parse(source("v = u"));
  EXPECT_FALSE(tree.has_errors());
  auto stmt = tree.root().named_children().at(0);
  ASSERT_TRUE(stmt.is("expression_statement"));
  auto assign = stmt.named_children().at(0);
  ASSERT_TRUE(assign.is("assignment"));
  EXPECT_EQ(assign.field("left")->text(), "v");
  EXPECT_EQ(assign.field("right")->text(), "u");

  std::vector<std::string> order;
  walk(tree, [&](const SyntaxNode& n) {
    if (n.is_named()) order.push_back(std::string(n.type()) + ":" + std::string(n.text()));
  });
  const std::vector<std::string> expect = {"module:v = u", "expression_statement:v = u", "assignment:v = u",
                                           "identifier:v", "identifier:u"};
  EXPECT_EQ(order, expect);
}

TEST(Parse, UnfinishedAttributeIsRecoverable) {
  const std::string code =
      "from pyPhasesRecordloader.RecordSignal import RecordSignal\n"
      "def f(signal: RecordSignal, newChannelName, typeStr):\n"
      "    newSignal = signal.getSignalByName(newChannelName)\n"
      "    newSignal.";
  auto tree = parse(source(code));
  EXPECT_TRUE(tree.has_errors());
  bool saw_tail = false;
  walk(tree, [&](const SyntaxNode& n) {
    if (n.is("identifier") && n.text() == "newSignal" && n.line() == 4) saw_tail = true;
  });
  EXPECT_TRUE(saw_tail);
}

TEST(Parse, StatementsVisitedInLineOrder) {
  auto tree = parse(source("a = 1\nb = 2\nc = 3\n"));
  std::vector<std::uint32_t> lines;
  walk(tree, [&](const SyntaxNode& n) {
    if (n.is("expression_statement")) lines.push_back(n.line());
  });
  EXPECT_EQ(lines, (std::vector<std::uint32_t>{1, 2, 3}));
}

TEST(Parse, RejectsInvalidUtf8) {
  EXPECT_THROW(parse(source("x = '\xFF'")), EncodingError);
}

TEST(Parse, PositionsUseTabsAsOneColumn) {
  auto tree = parse(source("if x:\n\ty = 1\n"));
  std::optional<SyntaxNode> y;
  walk(tree, [&](const SyntaxNode& n) {
    if (n.is("identifier") && n.text() == "y") y = n;
  });
  ASSERT_TRUE(y);
  EXPECT_EQ(y->start(), (Position{1, 1}));
  EXPECT_EQ(y->line(), 2u);
}

TEST(Parse, ModernSyntax) {
  auto tree = parse(source(
      "def f(x: int) -> list[int]:\n"
      "    with open(x) as fh:\n"
      "        pass\n"
      "    try:\n"
      "        pass\n"
      "    except ValueError as err:\n"
      "        pass\n"
      "    match x:\n"
      "        case 1:\n"
      "            pass\n"));
  EXPECT_FALSE(tree.has_errors());
}

TEST(Syntax, DottedNameAndDocstring) {
  auto tree = parse(source("\"\"\"Doc.\"\"\"\na.b.c\nf(x).y\n"));
  auto stmts = tree.root().named_children();
  EXPECT_EQ(docstring_node(tree.root())->text(), "\"\"\"Doc.\"\"\"");
  EXPECT_EQ(dotted_name(stmts.at(1).named_children().at(0)), "a.b.c");
  EXPECT_FALSE(dotted_name(stmts.at(2).named_children().at(0)).has_value());
  EXPECT_FALSE(docstring_node(parse(source("x = 1\n")).root()).has_value());
}

namespace {

void check_spans(const SyntaxTree& tree) {
  walk(tree, [&](const SyntaxNode& n) {
    ASSERT_LE(n.start_byte(), n.end_byte());
    ASSERT_LE(n.end_byte(), tree.text().size());
    ASSERT_EQ(n.text(), std::string_view(tree.text()).substr(n.start_byte(), n.end_byte() - n.start_byte()));
    ASSERT_LE(n.start(), n.end());
  });
}

}  // namespace

TEST(SyntaxProperty, IdempotentSpanSoundAndTotalOnTruncation) {
  const std::string full = repoctx::testing::read_text(repoctx::testing::fixture("recordloader") /
                                                       "pyPhasesRecordloader/RecordLoader.py");
  const auto reference = parse(source(full)).root().to_sexp();
  EXPECT_EQ(parse(source(full)).root().to_sexp(), reference);
  for (std::size_t cut = 0; cut <= full.size(); ++cut) {
    auto tree = parse(source(full.substr(0, cut)));
    ASSERT_TRUE(tree.root().valid()) << cut;
    EXPECT_EQ(tree.root().end_byte() <= cut, true);
    check_spans(tree);
  }
}

TEST(SyntaxProperty, RandomGarbageNeverFails) {
  std::mt19937 rng(11);
  const std::string alphabet = "abc():=.,[]{}'\"\n \t#@\\+-*";
  for (int round = 0; round < 300; ++round) {
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int i = 0; i < n; ++i) s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    auto tree = parse(source(s));
    check_spans(tree);
  }
}

TEST(ErrorSegments, LineBreaksSplitOutsideBrackets) {
  auto tree = parse(source("from a import (b,\n    c\nx = y.\n"));
  std::vector<SyntaxNode> errors;
  walk(tree, [&](const SyntaxNode& n) {
    if (n.is_error()) errors.push_back(n);
  });
  ASSERT_FALSE(errors.empty());
  std::size_t segments = 0;
  for (const auto& e : errors) segments += error_segments(e).size();
  EXPECT_GE(segments, 1u);
}
