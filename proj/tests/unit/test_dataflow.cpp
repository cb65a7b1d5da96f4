#include <gtest/gtest.h>

#include <random>

#include "repoctx/dataflow.hpp"
#include "test_support.hpp"

using namespace repoctx;
using repoctx::testing::source;

namespace {

DataflowGraph dfg(std::string_view code) {
  auto f = source(code);
  return build_dfg(parse(f), f);
}

DfgTriplet t(std::string h, std::uint32_t hl, Relation r, std::string tl, std::uint32_t tll) {
  return {{std::move(h), hl}, r, {std::move(tl), tll}};
}

bool has(const DataflowGraph& g, const DfgTriplet& x) { return g.triplets().contains(x); }

bool any_edge(const DataflowGraph& g, std::string_view head, std::string_view tail) {
  for (const auto& x : g.triplets())
    if (x.head.name == head && x.tail.name == tail) return true;
  return false;
}

const std::string kFig1 =
    "from pyPhasesRecordloader.RecordSignal import RecordSignal\n"
    "\n"
    "\n"
    "def renameChannel(signal: RecordSignal, newChannelName, typeStr):\n"
    "    newSignal = signal.getSignalByName(newChannelName)\n"
    "    newSignal.";

}  // namespace

TEST(Relation, NamesRoundTrip) {
  for (auto r : kAllRelations) EXPECT_EQ(parse_relation(relation_name(r)), r);
  EXPECT_FALSE(parse_relation("Calls").has_value());
  EXPECT_EQ(kAllRelations.size(), 5u);
}

TEST(BuildDfg, RelationTable) {
  EXPECT_EQ(dfg("v = u").triplets(), (std::set<DfgTriplet>{t("u", 1, Relation::Assigns, "v", 1)}));
  EXPECT_EQ(dfg("with f() as v").triplets(), (std::set<DfgTriplet>{t("f", 1, Relation::As, "v", 1)}));
  EXPECT_EQ(dfg("with f() as v:\n    pass\n").triplets(), (std::set<DfgTriplet>{t("f", 1, Relation::As, "v", 1)}));
  EXPECT_EQ(dfg("u.v").triplets(), (std::set<DfgTriplet>{t("u", 1, Relation::Refers, "u.v", 1)}));
  EXPECT_EQ(dfg("def f() -> v").triplets(), (std::set<DfgTriplet>{t("v", 1, Relation::Typeof, "f", 1)}));
  EXPECT_EQ(dfg("def f() -> v:\n    pass\n").triplets(), (std::set<DfgTriplet>{t("v", 1, Relation::Typeof, "f", 1)}));
  EXPECT_EQ(dfg("class v(u)").triplets(), (std::set<DfgTriplet>{t("u", 1, Relation::Inherits, "v", 1)}));
  EXPECT_EQ(dfg("class v(u):\n    pass\n").triplets(), (std::set<DfgTriplet>{t("u", 1, Relation::Inherits, "v", 1)}));
}

TEST(BuildDfg, IncompleteSnippetRelations) {
  auto g = dfg(kFig1);
  EXPECT_TRUE(has(g, t("RecordSignal", 1, Relation::Typeof, "signal", 4)));
  EXPECT_TRUE(has(g, t("signal", 4, Relation::Refers, "signal.getSignalByName", 5)));
  EXPECT_TRUE(has(g, t("signal.getSignalByName", 5, Relation::Assigns, "newSignal", 5)));
  EXPECT_FALSE(any_edge(g, "newChannelName", "newSignal"));
  for (const auto& x : g.triplets()) {
    if (x.head.name == "newChannelName") EXPECT_EQ(x.relation, Relation::Refers) << x.tail.name;
  }
}

TEST(BuildDfg, ReassignmentIsLineInstanced) {
  auto g = dfg("y = 0\n\nx = y\n\nx = x + 1\n");
  EXPECT_TRUE(has(g, t("x", 3, Relation::Assigns, "x", 5)));
  EXPECT_TRUE(repoctx::testing::topologically_sortable(g.size(), repoctx::testing::dfg_edges(g)));
  EXPECT_NE(g.find({"x", 3}), g.find({"x", 5}));
}

TEST(BuildDfg, TupleUnpacking) {
  auto pos = dfg("a, b = f(), g()\n");
  EXPECT_TRUE(has(pos, t("f", 1, Relation::Assigns, "a", 1)));
  EXPECT_TRUE(has(pos, t("g", 1, Relation::Assigns, "b", 1)));
  EXPECT_FALSE(any_edge(pos, "f", "b"));
  EXPECT_FALSE(any_edge(pos, "g", "a"));
  auto fan = dfg("a, b = f()\n");
  EXPECT_TRUE(has(fan, t("f", 1, Relation::Assigns, "a", 1)));
  EXPECT_TRUE(has(fan, t("f", 1, Relation::Assigns, "b", 1)));
}

TEST(BuildDfg, AugmentedAssignment) {
  auto g = dfg("x = 1\ny = 2\nx += y\n");
  EXPECT_TRUE(has(g, t("x", 1, Relation::Assigns, "x", 3)));
  EXPECT_TRUE(has(g, t("y", 2, Relation::Assigns, "x", 3)));
}

TEST(BuildDfg, AnnotatedAssignment) {
  auto g = dfg("v: T = u\n");
  EXPECT_TRUE(has(g, t("T", 1, Relation::Typeof, "v", 1)));
  EXPECT_TRUE(has(g, t("u", 1, Relation::Assigns, "v", 1)));
  auto s = dfg("v: \"T\" = u\n");
  EXPECT_TRUE(has(s, t("T", 1, Relation::Typeof, "v", 1)));
}

TEST(BuildDfg, PruningOfTypeInsensitiveDependencies) {
  auto g = dfg("y = f(a, b=c)\nz = [p, q]\nw = m if cond else n\nk = u > v\n");
  EXPECT_TRUE(any_edge(g, "f", "y"));
  for (auto arg : {"a", "c"}) EXPECT_FALSE(any_edge(g, arg, "y")) << arg;
  for (auto el : {"p", "q"}) EXPECT_FALSE(any_edge(g, el, "z")) << el;
  EXPECT_FALSE(any_edge(g, "cond", "w"));
  EXPECT_FALSE(any_edge(g, "u", "k"));
  EXPECT_FALSE(any_edge(g, "v", "k"));
}

TEST(BuildDfg, AttributeChainsAndCalls) {
  auto g = dfg("r = a.b.c()\n");
  EXPECT_TRUE(has(g, t("a", 1, Relation::Refers, "a.b", 1)));
  EXPECT_TRUE(has(g, t("a.b", 1, Relation::Refers, "a.b.c", 1)));
  EXPECT_TRUE(has(g, t("a.b.c", 1, Relation::Assigns, "r", 1)));
}

TEST(BuildDfg, ForWithExceptAndParameters) {
  auto g = dfg(
      "for item in items:\n"
      "    pass\n"
      "with open(p) as fh:\n"
      "    pass\n"
      "try:\n"
      "    pass\n"
      "except ValueError as err:\n"
      "    pass\n"
      "def f(a: A, b=dflt, *rest: R) -> Out:\n"
      "    pass\n"
      "class K(Base, metaclass=Meta):\n"
      "    pass\n");
  EXPECT_TRUE(any_edge(g, "items", "item"));
  EXPECT_TRUE(has(g, t("open", 3, Relation::As, "fh", 3)));
  EXPECT_TRUE(has(g, t("ValueError", 7, Relation::As, "err", 7)));
  EXPECT_TRUE(has(g, t("A", 9, Relation::Typeof, "a", 9)));
  EXPECT_TRUE(has(g, t("dflt", 9, Relation::Assigns, "b", 9)));
  EXPECT_TRUE(has(g, t("R", 9, Relation::Typeof, "rest", 9)));
  EXPECT_TRUE(has(g, t("Out", 9, Relation::Typeof, "f", 9)));
  EXPECT_TRUE(has(g, t("Base", 11, Relation::Inherits, "K", 11)));
  EXPECT_FALSE(any_edge(g, "Meta", "K"));
}

TEST(BuildDfg, UnknownConstructsAreSkipped) {
  auto g = dfg("match x:\n    case [a, b]:\n        pass\n");
  for (const auto& x : g.triplets()) EXPECT_NE(x.head, x.tail);
  auto e = dfg("");
  EXPECT_EQ(e.size(), 0u);
}

TEST(DumpTriplets, LineOriented) {
  EXPECT_EQ(dump_triplets(dfg("v = u")), "u -Assigns-> v @1,1\n");
}

TEST(ExpandRefers, Examples) {
  EXPECT_EQ(expand_refers(dfg("u.v"), "u"), (std::set<std::string>{"u", "u.v"}));
  EXPECT_EQ(expand_refers(DataflowGraph{}, "z"), (std::set<std::string>{"z"}));
  EXPECT_EQ(expand_refers(dfg("a.b\na.b.c\n"), "a"), (std::set<std::string>{"a", "a.b", "a.b.c"}));
}

TEST(ExpandRefers, MatchesReachabilityOracle) {
  auto g = dfg("a.b\nx = a.c.d\na.b.e\nq.r\n");
  // Oracle: names of every node reachable over Refers-only edges from a node
  // whose name is `a` or starts with "a.".
  const auto n = g.size();
  std::vector<repoctx::testing::Edge> refers;
  for (const auto& e : g.edges())
    if (e.relation == Relation::Refers) refers.emplace_back(e.head, e.tail);
  auto reach = repoctx::testing::transitive_closure(n, refers);
  std::set<std::string> expect{"a"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& name = g.node(i).name;
    if (name != "a" && !name.starts_with("a.")) continue;
    expect.insert(name);
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) expect.insert(g.node(j).name);
  }
  EXPECT_EQ(expand_refers(g, "a"), expect);
}

TEST(LastLineDependencies, Examples) {
  auto g = dfg(kFig1);
  auto deps = last_line_dependencies(g, 6);
  std::set<std::string> names;
  for (const auto& n : deps) names.insert(n.name);
  for (auto want : {"signal", "signal.getSignalByName", "RecordSignal", "newSignal"})
    EXPECT_TRUE(names.contains(want)) << want;

  EXPECT_TRUE(last_line_dependencies(dfg("x = 1\n\ny = x\n"), 2).empty());

  auto chain = last_line_dependencies(dfg("x = 1\ny = x\nz = y\n"), 3);
  // A read feeding an assignment flows from its reaching definition.
  EXPECT_EQ(chain, (std::set<DfgNode>{{"x", 1}, {"y", 2}, {"z", 3}}));
}

namespace {

std::string random_program(std::mt19937& rng) {
  const std::vector<std::string> names = {"a", "b", "c", "d"};
  auto pick = [&] { return names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)]; };
  std::string code;
  const int lines = std::uniform_int_distribution<int>(1, 12)(rng);
  for (int i = 0; i < lines; ++i) {
    switch (std::uniform_int_distribution<int>(0, 7)(rng)) {
      case 0: code += pick() + " = " + pick() + "\n"; break;
      case 1: code += pick() + " = " + pick() + "." + pick() + "\n"; break;
      case 2: code += pick() + " += " + pick() + "\n"; break;
      case 3: code += pick() + ": " + pick() + " = " + pick() + "(" + pick() + ")\n"; break;
      case 4: code += pick() + ", " + pick() + " = " + pick() + ", " + pick() + "\n"; break;
      case 5: code += "with " + pick() + "() as " + pick() + ":\n    " + pick() + " = " + pick() + "\n"; break;
      case 6: code += "def " + pick() + "(" + pick() + ": " + pick() + ") -> " + pick() + ":\n    return " + pick() + "\n"; break;
      default: code += pick() + "." + pick() + "\n"; break;
    }
  }
  if (std::uniform_int_distribution<int>(0, 1)(rng)) code += pick() + ".";
  return code;
}

}  // namespace

TEST(DataflowProperty, AcyclicDeterministicAndClosed) {
  std::mt19937 rng(3);
  for (int round = 0; round < 400; ++round) {
    const auto code = random_program(rng);
    const auto g = dfg(code);
    EXPECT_TRUE(repoctx::testing::topologically_sortable(g.size(), repoctx::testing::dfg_edges(g))) << code;
    EXPECT_EQ(dfg(code).triplets(), g.triplets()) << code;
    std::set<DfgNode> nodes(g.nodes().begin(), g.nodes().end());
    for (const auto& x : g.triplets()) {
      EXPECT_TRUE(nodes.contains(x.head));
      EXPECT_TRUE(nodes.contains(x.tail));
      EXPECT_NE(x.head, x.tail);
      EXPECT_FALSE(x.head.name.empty());
      EXPECT_EQ(x.head.name.find_first_of(" \t\n"), std::string::npos);
      EXPECT_LE(x.head.line, x.tail.line);
    }
  }
}

TEST(DataflowProperty, LastLineDependenciesMatchReachability) {
  std::mt19937 rng(5);
  for (int round = 0; round < 300; ++round) {
    const auto code = random_program(rng);
    const auto g = dfg(code);
    const auto reach = repoctx::testing::transitive_closure(g.size(), repoctx::testing::dfg_edges(g));
    const std::uint32_t last = count_lines(code);
    std::set<DfgNode> expect;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (g.node(v).line != last) continue;
      expect.insert(g.node(v));
      for (std::size_t u = 0; u < g.size(); ++u)
        if (reach[u][v]) expect.insert(g.node(u));
    }
    EXPECT_EQ(last_line_dependencies(g, last), expect) << code;
  }
}

TEST(DataflowProperty, RelationSoundness) {
  // Each relation kind must come from a line whose text has the matching construct.
  std::mt19937 rng(9);
  for (int round = 0; round < 300; ++round) {
    const auto code = random_program(rng);
    const auto g = dfg(code);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= code.size()) {
      auto nl = code.find('\n', start);
      if (nl == std::string::npos) nl = code.size();
      lines.push_back(code.substr(start, nl - start));
      start = nl + 1;
    }
    for (const auto& x : g.triplets()) {
      const auto& text = lines.at(x.tail.line - 1);
      switch (x.relation) {
        case Relation::Assigns: EXPECT_NE(text.find('='), std::string::npos) << code; break;
        case Relation::As: EXPECT_NE(text.find(" as "), std::string::npos) << code; break;
        case Relation::Typeof: EXPECT_TRUE(text.find(':') != std::string::npos || text.find("->") != std::string::npos) << code; break;
        case Relation::Refers:
          EXPECT_TRUE(x.tail.name.starts_with(x.head.name + ".") || x.tail.name == x.head.name) << code;
          break;
        case Relation::Inherits: EXPECT_NE(text.find("class"), std::string::npos) << code; break;
      }
    }
  }
}

TEST(PropagateNames, TypeHintsCarryTheImportName) {
  auto g = dfg(kFig1);
  auto root = g.find({"RecordSignal", 1});
  ASSERT_TRUE(root);
  auto names = propagate_names(g, *root, "RecordSignal");
  EXPECT_TRUE(names.contains("RecordSignal"));
  EXPECT_TRUE(names.contains("RecordSignal.getSignalByName"));
}
