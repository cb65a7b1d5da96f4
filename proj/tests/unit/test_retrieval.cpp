#include <gtest/gtest.h>

#include "repoctx/retrieval.hpp"
#include "test_support.hpp"

using namespace repoctx;
namespace rt = repoctx::testing;

namespace {

std::set<std::pair<std::string, std::string>> pairs(const std::vector<ImportInfo>& infos) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& i : infos) out.emplace(std::string(i.level, '.') + i.module, i.name);
  return out;
}

ContextGraph graph_of(std::vector<std::pair<std::string, std::string>> files) {
  std::vector<FileIndex> parts;
  for (auto& [path, text] : files) parts.push_back(index_file(SourceFile::from_text(path, text)));
  return link_imports(std::move(parts));
}

}  // namespace

TEST(CollectImports, FineGrainedExpansion) {
  auto infos = collect_imports(rt::source("from a import b\nx = b.c\ny = b.c.d\n"));
  EXPECT_EQ(pairs(infos), (std::set<std::pair<std::string, std::string>>{{"a", "b"}, {"a", "b.c"}, {"a", "b.c.d"}}));
  EXPECT_TRUE(collect_imports(rt::source("x = 1\n")).empty());
}

TEST(CollectImports, TypeHintCarriesTheImportedName) {
  auto infos = collect_imports(rt::source(
      "from RecordSignal import RecordSignal\n"
      "def f(signal: RecordSignal):\n"
      "    s = signal.getSignalByName(1)\n"));
  EXPECT_TRUE(pairs(infos).contains({"RecordSignal", "RecordSignal.getSignalByName"}));
  for (const auto& i : infos) EXPECT_EQ(i.origin_line, 1u);
}

TEST(Resolve, DeepestMatchAndExternal) {
  auto g = graph_of({{"mymod.py", "class Klass:\n    def real(self):\n        pass\n"}});
  ImportInfo deep{0, "mymod", "Klass.nonexistent", 1, false, {}};
  ASSERT_TRUE(resolve(deep, "use.py", g));
  EXPECT_EQ(rt::qpath(g, *resolve(deep, "use.py", g)), "mymod.py:Klass");
  ImportInfo exact{0, "mymod", "Klass.real", 1, false, {}};
  EXPECT_EQ(rt::qpath(g, *resolve(exact, "use.py", g)), "mymod.py:Klass.real");
  EXPECT_FALSE(resolve(ImportInfo{0, "os", "path", 1, false, {}}, "use.py", g).has_value());
}

TEST(Resolve, AmbiguousNamePrefersSmallestLine) {
  auto g = graph_of({{"m.py", "def f():\n    pass\n\ndef f():\n    pass\n"}});
  EXPECT_EQ(rt::qpath(g, *resolve(ImportInfo{0, "m", "f", 1, false, {}}, "u.py", g)), "m.py:f");
}

TEST(DependencyClosure, Examples) {
  auto g = index_repository_serial(rt::fixture("recordloader"));
  auto get = *g.find("pyPhasesRecordloader/RecordSignal.py:RecordSignal.getSignalByName");
  EXPECT_EQ(rt::qpaths(g, dependency_closure(get, g)),
            (std::vector<std::string>{"pyPhasesRecordloader/Signal.py:Signal"}));
  auto iso = *g.find("pyPhasesRecordloader/Signal.py:SignalType.EEG");
  EXPECT_TRUE(dependency_closure(iso, g).empty());

  auto m = index_repository_serial(rt::fixture("mutual"));
  auto alpha = *m.find("a.py:ALPHA");
  EXPECT_EQ(rt::qpaths(m, dependency_closure(alpha, m)), (std::vector<std::string>{"b.py:BETA"}));
}

TEST(DependencyClosure, DepthFirstPreorder) {
  auto g = graph_of({{"m.py",
                      "class A:\n    pass\nclass B:\n    pass\nclass C:\n    pass\n"
                      "x: A = None\n"
                      "class D(A, B):\n    pass\n"
                      "class E(D, C):\n    pass\n"}});
  auto e = *g.find("m.py:E");
  // Targets are visited in id order: C precedes D, then D -> A, B.
  EXPECT_EQ(rt::qpaths(g, dependency_closure(e, g)),
            (std::vector<std::string>{"m.py:C", "m.py:D", "m.py:A", "m.py:B"}));
}

TEST(Retrieve, HandExpectationsOnFixtures) {
  for (const auto& c : rt::retrieval_cases()) {
    auto g = index_repository_serial(rt::fixture(c.repo));
    auto code = rt::unfinished_of(c);
    auto r = retrieve(code, c.cursor.line + 1, g);
    EXPECT_EQ(rt::qpaths(g, r.relevant), c.relevant) << c.name;
    EXPECT_EQ(rt::qpaths(g, r.other), c.other) << c.name;
  }
}

// Brute force: DFG reachability by Warshall's closure, closures by the same
// over depends edges, E_r by testing every support node against the
// reachable set.
TEST(Retrieve, AllPairsReachabilityOracle) {
  for (const auto& c : rt::retrieval_cases()) {
    auto g = index_repository_serial(rt::fixture(c.repo));
    auto code = analyze_unfinished(rt::unfinished_of(c));
    const std::uint32_t cursor = c.cursor.line + 1;
    auto r = retrieve(code, cursor, g);

    const auto& dfg = code.graph;
    const auto reach = rt::transitive_closure(dfg.size(), rt::dfg_edges(dfg));
    std::set<DfgNode> anc;
    for (std::size_t v = 0; v < dfg.size(); ++v) {
      if (dfg.node(v).line != cursor) continue;
      anc.insert(dfg.node(v));
      for (std::size_t u = 0; u < dfg.size(); ++u)
        if (reach[u][v]) anc.insert(dfg.node(u));
    }
    std::set<std::string> heads;
    for (const auto& n : anc) heads.insert(n.name.substr(0, n.name.find('.')));

    std::map<EntityId, std::pair<std::uint32_t, bool>> expect;
    ASSERT_EQ(r.resolved.size(), r.imports.size());
    for (std::size_t i = 0; i < r.imports.size(); ++i) {
      const auto& info = r.imports[i];
      if (!r.resolved[i]) continue;
      std::vector<std::pair<EntityId, bool>> hits;
      if (info.star) {
        for (EntityId ch : g.children(*r.resolved[i])) hits.emplace_back(ch, heads.contains(g.entity(ch).name));
      } else {
        bool rel = false;
        for (const auto& s : info.support) rel = rel || anc.contains(s);
        hits.emplace_back(*r.resolved[i], rel);
      }
      for (auto [e, rel] : hits) {
        auto [it, fresh] = expect.try_emplace(e, info.origin_line, rel);
        if (!fresh) {
          it->second.first = std::min(it->second.first, info.origin_line);
          it->second.second = it->second.second || rel;
        }
      }
    }
    std::vector<std::tuple<std::uint32_t, std::string, bool>> sorted;
    for (auto& [e, v] : expect) sorted.emplace_back(v.first, rt::qpath(g, e), v.second);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::string> want_r, want_o;
    for (auto& [line, qp, rel] : sorted) (rel ? want_r : want_o).push_back(qp);
    EXPECT_EQ(rt::qpaths(g, r.relevant), want_r) << c.name;
    EXPECT_EQ(rt::qpaths(g, r.other), want_o) << c.name;

    const auto dep_reach = rt::transitive_closure(g.size(), rt::depends_edges(g));
    for (auto& [e, closure] : r.closure) {
      std::set<EntityId> want;
      for (EntityId j = 0; j < g.size(); ++j)
        if (dep_reach[e][j] && j != e) want.insert(j);
      EXPECT_EQ(std::set<EntityId>(closure.begin(), closure.end()), want) << c.name << " " << rt::qpath(g, e);
      EXPECT_EQ(closure.size(), want.size());
    }
  }
}

TEST(Retrieve, PartitionAndOrdering) {
  for (const auto& c : rt::retrieval_cases()) {
    auto g = index_repository_serial(rt::fixture(c.repo));
    auto r = retrieve(rt::unfinished_of(c), c.cursor.line + 1, g);
    std::set<EntityId> rs(r.relevant.begin(), r.relevant.end());
    std::set<EntityId> all;
    for (auto& x : r.resolved)
      if (x) all.insert(*x);
    for (EntityId o : r.other) EXPECT_FALSE(rs.contains(o)) << c.name;
    std::set<EntityId> uni(rs);
    uni.insert(r.other.begin(), r.other.end());
    // Star imports contribute module children instead of the module itself.
    for (std::size_t i = 0; i < r.imports.size(); ++i)
      if (r.imports[i].star && r.resolved[i]) {
        all.erase(*r.resolved[i]);
        for (EntityId ch : g.children(*r.resolved[i])) all.insert(ch);
      }
    EXPECT_EQ(uni, all) << c.name;
  }
}

TEST(Retrieve, CommentCursorAndNoImports) {
  auto g = index_repository_serial(rt::fixture("mutual"));
  auto r = retrieve(rt::source("from a import ALPHA\n# nothing here\n", "use.py"), 2, g);
  EXPECT_TRUE(r.relevant.empty());
  EXPECT_EQ(rt::qpaths(g, r.other), (std::vector<std::string>{"a.py:ALPHA"}));
  auto z = retrieve(rt::source("x = 1\ny = x.\n", "use.py"), 2, g);
  EXPECT_TRUE(z.relevant.empty());
  EXPECT_TRUE(z.other.empty());
}

TEST(Retrieve, TwoStepAssignsChain) {
  auto g = graph_of({{"p.py", "def make():\n    pass\n"},
                     {"q.py", "def other():\n    pass\n"},
                     {"s.py", "LIMIT = 3\n"}});
  auto code = rt::source(
      "from p import make\n"
      "from q import other\n"
      "from s import LIMIT\n"
      "a = make()\n"
      "b = a\n"
      "c = other()\n"
      "d = b.",
      "u.py");
  auto r = retrieve(code, 7, g);
  EXPECT_EQ(rt::qpaths(g, r.relevant), (std::vector<std::string>{"p.py:make"}));
  EXPECT_EQ(rt::qpaths(g, r.other), (std::vector<std::string>{"q.py:other", "s.py:LIMIT"}));
}

TEST(RetrieveProperty, UnrelatedImportNeverShrinksRelevant) {
  for (const auto& c : rt::retrieval_cases()) {
    auto g = index_repository_serial(rt::fixture(c.repo));
    auto base = rt::unfinished_of(c);
    auto r0 = retrieve(base, c.cursor.line + 1, g);
    for (std::string extra : {"import os\n", "from zzz_unrelated import thing\n", "import json as j\n"}) {
      auto more = SourceFile::from_text(base.repo_relative_path, extra + base.text);
      auto r1 = retrieve(more, c.cursor.line + 2, g);
      EXPECT_EQ(rt::qpaths(g, r1.relevant), rt::qpaths(g, r0.relevant)) << c.name << " + " << extra;
    }
  }
}

TEST(FormatRetrieval, LineOriented) {
  auto g = index_repository_serial(rt::fixture("mutual"));
  auto r = retrieve(rt::source("from a import ALPHA\nimport os\nx = ALPHA.", "use.py"), 3, g);
  EXPECT_EQ(format_retrieval(r, g),
            "import 1 (a, ALPHA) -> a.py:ALPHA\n"
            "import 2 (os, ) -> external\n"
            "relevant a.py:ALPHA b.py:BETA\n");
}
