#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "repoctx/prompt.hpp"
#include "test_support.hpp"

using namespace repoctx;
namespace rt = repoctx::testing;

namespace {

ContextGraph graph_of(std::vector<std::pair<std::string, std::string>> files) {
  std::vector<FileIndex> parts;
  for (auto& [path, text] : files) parts.push_back(index_file(SourceFile::from_text(path, text)));
  return link_imports(std::move(parts));
}

std::vector<EntityId> ids(const ContextGraph& g, std::vector<std::string> qps) {
  std::vector<EntityId> out;
  for (const auto& q : qps) {
    auto i = g.find(q);
    EXPECT_TRUE(i) << q;
    if (i) out.push_back(*i);
  }
  return out;
}

std::size_t occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto at = hay.find(needle); at != std::string_view::npos; at = hay.find(needle, at + 1)) ++n;
  return n;
}

// Module-level view of a set of entities and their closures, computed from
// the graph with plain reachability.
struct ModuleView {
  std::vector<EntityId> modules;
  std::set<std::pair<EntityId, EntityId>> edges;  // m1 -> m2: m1 depends on m2
};

ModuleView module_view(const std::vector<EntityId>& ec, const ContextGraph& g) {
  const auto reach = rt::transitive_closure(g.size(), rt::depends_edges(g));
  std::set<EntityId> all(ec.begin(), ec.end());
  for (EntityId e : ec)
    for (EntityId j = 0; j < g.size(); ++j)
      if (reach[e][j]) all.insert(j);
  ModuleView v;
  std::set<EntityId> mods;
  for (EntityId e : all) mods.insert(g.module_of(e));
  v.modules.assign(mods.begin(), mods.end());
  for (EntityId e : all)
    for (EntityId d : g.depends(e))
      if (all.contains(d) && g.module_of(e) != g.module_of(d)) v.edges.emplace(g.module_of(e), g.module_of(d));
  return v;
}

// Every permutation is tried; the accepted one pops, at each step, a module
// with the fewest remaining predecessors, then the largest rank number, then
// the smallest path. Returns the reversed pop sequence.
std::vector<EntityId> brute_force_order(const std::vector<EntityId>& ec, const ContextGraph& g) {
  const auto v = module_view(ec, g);
  const std::size_t kNone = 1u << 30;
  std::map<EntityId, std::size_t> prio;
  for (EntityId m : v.modules) prio[m] = kNone;
  std::set<EntityId> ranked;
  std::size_t next = 1;
  for (EntityId e : ec) {
    EntityId m = g.module_of(e);
    if (ranked.insert(m).second) prio[m] = next++;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (auto [a, b] : v.edges)
      if (!ranked.contains(b) && prio[a] < prio[b]) {
        prio[b] = prio[a];
        changed = true;
      }
  }
  auto key = [&](EntityId m, const std::set<EntityId>& remaining) {
    std::size_t preds = 0;
    for (auto [a, b] : v.edges)
      if (b == m && remaining.contains(a)) ++preds;
    // Smaller key is better.
    return std::make_tuple(preds, prio[m] == kNone ? 0 : kNone - prio[m], g.entity(m).file_path);
  };
  std::vector<EntityId> perm = v.modules;
  std::sort(perm.begin(), perm.end());
  std::vector<std::vector<EntityId>> accepted;
  do {
    std::set<EntityId> remaining(perm.begin(), perm.end());
    bool ok = true;
    for (EntityId m : perm) {
      auto mine = key(m, remaining);
      for (EntityId o : remaining)
        if (o != m && key(o, remaining) < mine) ok = false;
      remaining.erase(m);
      if (!ok) break;
    }
    if (ok) accepted.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_EQ(accepted.size(), 1u);
  if (accepted.empty()) return {};
  auto out = accepted.front();
  std::reverse(out.begin(), out.end());
  return out;
}

struct Cycle4 {
  ContextGraph graph = index_repository_serial(rt::fixture("cycle4"));
  RetrievalResult r = [&] {
    auto c = rt::retrieval_cases().at(1);
    return retrieve(rt::unfinished_of(c), c.cursor.line + 1, graph);
  }();
};

}  // namespace

TEST(Allocate, Examples) {
  EXPECT_EQ(allocate(2048, 1500, 400), (TokenBudget{2048, 1648, 400}));
  EXPECT_EQ(allocate(2048, 2000, 2000), (TokenBudget{2048, 1024, 1024}));
  EXPECT_EQ(allocate(2048, 100, 3000), (TokenBudget{2048, 100, 1948}));
  EXPECT_EQ(allocate(2048, 0, 0), (TokenBudget{2048, 2048, 0}));
  EXPECT_EQ(allocate(7, 100, 100), (TokenBudget{7, 3, 4}));
}

TEST(AllocateProperty, SplitRules) {
  std::mt19937 rng(31);
  for (int round = 0; round < 2000; ++round) {
    const std::size_t total = std::uniform_int_distribution<std::size_t>(1, 5000)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, 6000)(rng);
    const std::size_t c = std::uniform_int_distribution<std::size_t>(0, 6000)(rng);
    auto b = allocate(total, k, c);
    EXPECT_LE(b.knowledge_alloc + b.code_alloc, total);
    if (k >= total / 2 && c >= total - total / 2) {
      EXPECT_EQ(b.knowledge_alloc, total / 2);
      EXPECT_EQ(b.code_alloc, total - total / 2);
    }
    if (c < total - total / 2) EXPECT_EQ(b.code_alloc, c);
    else if (k < total / 2) EXPECT_EQ(b.knowledge_alloc, k);
  }
}

TEST(Scope, Names) {
  EXPECT_EQ(parse_scope("definition"), Scope::Definition);
  EXPECT_EQ(parse_scope(scope_name(Scope::Complete)), Scope::Complete);
  EXPECT_THROW(parse_scope("full"), std::invalid_argument);
}

TEST(RenderEntity, DefinitionScopeClass) {
  auto g = index_repository_serial(rt::fixture("recordloader"));
  auto rs = *g.find("pyPhasesRecordloader/RecordSignal.py:RecordSignal");
  EXPECT_EQ(render_entity(g, rs, Scope::Definition),
            "class RecordSignal:\n"
            "    \"\"\"All channels of one recording.\"\"\"\n"
            "    def __init__(self):\n"
            "        ...\n"
            "    def addSignal(self, signal: Signal):\n"
            "        ...\n"
            "    def getSignalByName(self, name) -> Signal:\n"
            "        ...\n");
  auto get = *g.find("pyPhasesRecordloader/RecordSignal.py:RecordSignal.getSignalByName");
  EXPECT_EQ(render_entity(g, get, Scope::Complete),
            "    def getSignalByName(self, name) -> Signal:\n"
            "        return self.signals[self.signalNames.index(name)]\n");
}

TEST(RenderEntity, ModuleWithDocstring) {
  auto g = graph_of({{"pkg/doc.py", "\"\"\"Only a docstring.\"\"\"\n"}});
  EXPECT_EQ(organize_bk(ids(g, {"pkg/doc.py"}), g, Scope::Complete), "# pkg/doc.py\n\"\"\"Only a docstring.\"\"\"\n");
}

TEST(RenderEntity, MembersInSourceOrder) {
  auto g = index_repository_serial(rt::fixture("recordloader"));
  auto cls = *g.find("pyPhasesRecordloader/Signal.py:Signal");
  const auto text = render_entity(g, cls, Scope::Complete);
  std::vector<std::pair<std::size_t, std::uint32_t>> pos;
  for (EntityId c : g.children(cls)) pos.emplace_back(text.find(g.entity(c).signature), g.entity(c).start_line);
  ASSERT_EQ(pos.size(), 2u);
  for (std::size_t i = 1; i < pos.size(); ++i) {
    EXPECT_LT(pos[i - 1].first, pos[i].first);
    EXPECT_LT(pos[i - 1].second, pos[i].second);
  }
}

TEST(OrganizeBk, DependentModuleFirst) {
  auto g = graph_of({{"A.py", "from B import Beta\n\nclass Alpha(Beta):\n    pass\n"},
                     {"B.py", "class Beta:\n    pass\n"}});
  EXPECT_EQ(organize_bk(ids(g, {"A.py:Alpha"}), g, Scope::Complete),
            "# B.py\nclass Beta:\n    ...\n# A.py\nclass Alpha(Beta):\n    ...\n");
  EXPECT_EQ(organize_bk({}, g, Scope::Complete), "");
}

TEST(OrganizeBk, TwoModuleCycleHandExecuted) {
  auto g = graph_of({{"a.py", "from b import BV\nAV = BV\n"}, {"b.py", "from a import AV\nBV = AV\n"}});
  const auto ec = ids(g, {"a.py:AV"});
  // Ranks: a = 1, b inherits 1 from a. Both keep one residual predecessor,
  // ranks tie, so a.py pops first by path; reversed, b.py leads.
  EXPECT_EQ(organize_bk(ec, g, Scope::Complete), "# b.py\nBV = AV\n# a.py\nAV = BV\n");
  EXPECT_EQ(module_order(ec, g), brute_force_order(ec, g));
}

TEST(OrganizeBk, MatchesBruteForceOrderOnCycle4Subsets) {
  Cycle4 c;
  const auto& g = c.graph;
  std::vector<EntityId> pool;
  for (EntityId i = 0; i < g.size(); ++i)
    if (g.entity(i).kind != EntityKind::Module) pool.push_back(i);
  ASSERT_LE(pool.size(), 12u);
  std::mt19937 rng(37);
  for (unsigned mask = 1; mask < (1u << pool.size()); mask += 1 + rng() % 7) {
    std::vector<EntityId> ec;
    for (std::size_t b = 0; b < pool.size(); ++b)
      if (mask & (1u << b)) ec.push_back(pool[b]);
    std::shuffle(ec.begin(), ec.end(), rng);
    const auto order = module_order(ec, g);
    EXPECT_EQ(order, brute_force_order(ec, g)) << mask;

    const auto view = module_view(ec, g);
    std::vector<rt::Edge> e;
    std::map<EntityId, std::size_t> index;
    for (std::size_t i = 0; i < view.modules.size(); ++i) index[view.modules[i]] = i;
    for (auto [a, b] : view.edges) e.emplace_back(index[a], index[b]);
    if (!rt::topologically_sortable(view.modules.size(), e)) continue;
    const auto bk = organize_bk(ec, g, Scope::Complete);
    for (auto [m1, m2] : view.edges) {
      auto p1 = bk.find("# " + g.entity(m1).file_path + "\n");
      auto p2 = bk.find("# " + g.entity(m2).file_path + "\n");
      ASSERT_NE(p1, std::string::npos);
      ASSERT_NE(p2, std::string::npos);
      EXPECT_LT(p2, p1) << "dependent module must come first: " << bk;
    }
  }
}

TEST(GenerateBk, Cycle4Goldens) {
  Cycle4 c;
  ApproxTokenizer tok;
  ASSERT_EQ(rt::qpaths(c.graph, c.r.relevant), (std::vector<std::string>{"square.py:Square"}));
  const auto relevant = rt::read_text(rt::golden("cycle4_relevant.txt"));
  const auto all = rt::read_text(rt::golden("cycle4_all.txt"));
  const std::vector<std::pair<std::size_t, std::string>> cases = {{0, ""}, {128, relevant}, {512, all}, {4096, all}};
  for (const auto& [n, want] : cases) {
    auto k = generate_bk(c.r.relevant, c.r.other, n, c.graph, Scope::Complete, tok);
    EXPECT_EQ(k.text, want) << "n=" << n;
  }
  auto def = generate_bk(c.r.relevant, c.r.other, 4096, c.graph, Scope::Definition, tok);
  EXPECT_EQ(def.text, rt::read_text(rt::golden("cycle4_all_definition.txt")));
  auto cut = generate_bk(c.r.relevant, c.r.other, 64, c.graph, Scope::Complete, tok);
  EXPECT_TRUE(cut.truncated);
  EXPECT_EQ(cut.accepted_other, 0u);
  EXPECT_EQ(cut.text, tok.head(relevant, 64));
}

TEST(GenerateBk, StopsAtFirstOverflow) {
  // Character tokens: E_r renders to 300, each E_o entity adds 100.
  const std::string r_stmt = "R = \"" + std::string(286, 'x') + "\"\n";
  auto o_stmt = [](char c) { return "O = \"" + std::string(85, c) + "\"\n"; };
  auto g = graph_of({{"r.py", r_stmt}, {"o1.py", o_stmt('a')}, {"o2.py", o_stmt('b')}, {"o3.py", o_stmt('c')}});
  CharTokenizer tok;
  const auto er = ids(g, {"r.py:R"});
  const auto eo = ids(g, {"o1.py:O", "o2.py:O", "o3.py:O"});
  ASSERT_EQ(tok.count(organize_bk(er, g, Scope::Complete)), 300u);
  auto k = generate_bk(er, eo, 450, g, Scope::Complete, tok);
  EXPECT_EQ(k.accepted_other, 1u);
  EXPECT_EQ(tok.count(k.text), 400u);
  EXPECT_EQ(k.text, "# r.py\n" + r_stmt + "# o1.py\n" + o_stmt('a'));
  EXPECT_FALSE(k.truncated);
  auto small = generate_bk(er, eo, 120, g, Scope::Complete, tok);
  EXPECT_TRUE(small.truncated);
  EXPECT_EQ(small.text, organize_bk(er, g, Scope::Complete).substr(0, 120));
  EXPECT_EQ(generate_bk(er, eo, 0, g, Scope::Complete, tok).text, "");
}

TEST(GenerateBk, TokenCountOracle) {
  Cycle4 c;
  ApproxTokenizer tok;
  for (std::size_t n = 0; n <= 260; n += 13) {
    auto k = generate_bk(c.r.relevant, c.r.other, n, c.graph, Scope::Complete, tok);
    // Oracle: the longest prefix of E_o whose organised text fits, stopping at the first miss.
    std::vector<EntityId> cur = c.r.relevant;
    std::size_t accepted = 0;
    std::string best = organize_bk(cur, c.graph, Scope::Complete);
    for (EntityId e : c.r.other) {
      cur.push_back(e);
      auto cand = organize_bk(cur, c.graph, Scope::Complete);
      if (tok.count(cand) > n) break;
      best = cand;
      ++accepted;
    }
    if (tok.count(best) > n) best = std::string(tok.head(best, n));
    EXPECT_EQ(k.text, best) << n;
    EXPECT_EQ(k.accepted_other, accepted) << n;
    EXPECT_LE(tok.count(k.text), n);
  }
}

TEST(WrapKnowledge, TripleQuotes) {
  EXPECT_EQ(wrap_knowledge("# a.py\nx = 1\n"), "'''\n# a.py\nx = 1\n'''\n");
  EXPECT_EQ(wrap_knowledge("# a.py\nx = 1"), "'''\n# a.py\nx = 1\n'''\n");
}

TEST(BuildPrompt, RecordLoaderSnapshots) {
  auto g = index_repository_serial(rt::fixture("recordloader"));
  auto c = rt::retrieval_cases().at(0);
  ApproxTokenizer tok;
  auto plan = build_prompt(rt::unfinished_of(c), g, {}, tok);
  EXPECT_EQ(plan.final_prompt, rt::read_text(rt::golden("recordloader_complete.txt")));
  auto def = build_prompt(rt::unfinished_of(c), g, {2048, Scope::Definition}, tok);
  EXPECT_EQ(def.final_prompt, rt::read_text(rt::golden("recordloader_definition.txt")));
  // Signal's module precedes RecordSignal's, both inside the string block.
  const auto& p = plan.final_prompt;
  EXPECT_TRUE(p.starts_with("'''\n# "));
  EXPECT_LT(p.find("class Signal:"), p.find("class RecordSignal:"));
  EXPECT_LT(p.find("class RecordSignal:"), p.find("\n'''\n"));
  EXPECT_TRUE(p.ends_with(plan.code_suffix));
  EXPECT_GE(plan.elapsed_ms, 0.0);
  EXPECT_EQ(plan.prompt_tokens, tok.count(plan.final_prompt));
}

TEST(BuildPrompt, ZeroShotDegeneration) {
  auto g = index_repository_serial(rt::fixture("mutual"));
  ApproxTokenizer tok;
  const auto code = rt::source("import os\nx = os.path.\n", "solo.py");
  auto plan = build_prompt(code, g, {}, tok);
  EXPECT_EQ(plan.final_prompt, code.text);
  auto tight = build_prompt(code, g, {4, Scope::Complete}, tok);
  EXPECT_EQ(tight.final_prompt, std::string(tok.tail(code.text, 4)));
}

TEST(BuildPrompt, Deterministic) {
  for (const auto& c : rt::retrieval_cases()) {
    auto g1 = index_repository_serial(rt::fixture(c.repo));
    auto g2 = index_repository(rt::fixture(c.repo), {3});
    ApproxTokenizer tok;
    for (std::size_t total : {64u, 256u, 2048u}) {
      auto a = build_prompt(rt::unfinished_of(c), g1, {total, Scope::Complete}, tok);
      auto b = build_prompt(rt::unfinished_of(c), g2, {total, Scope::Complete}, tok);
      EXPECT_EQ(a.final_prompt, b.final_prompt) << c.name << total;
    }
  }
}

TEST(UnfinishedPrefix, CutsAtCursor) {
  auto f = rt::source("ab\ncdef\n");
  EXPECT_EQ(unfinished_prefix(f, {1, 2}).text, "ab\ncd");
  EXPECT_EQ(unfinished_prefix(f, {0, 0}).text, "");
}

TEST(PromptProperty, ScopeMonotonicity) {
  for (const auto& repo : rt::fixture_repos()) {
    auto g = index_repository_serial(rt::fixture(repo));
    for (EntityId i = 0; i < g.size(); ++i)
      EXPECT_LE(render_entity(g, i, Scope::Definition).size(), render_entity(g, i, Scope::Complete).size())
          << rt::qpath(g, i);
  }
}

TEST(PromptProperty, DedupAcrossContainsMerge) {
  for (const auto& c : rt::retrieval_cases()) {
    auto g = index_repository_serial(rt::fixture(c.repo));
    auto r = retrieve(rt::unfinished_of(c), c.cursor.line + 1, g);
    std::vector<EntityId> ec = r.relevant;
    ec.insert(ec.end(), r.other.begin(), r.other.end());
    for (auto scope : {Scope::Complete, Scope::Definition}) {
      const auto bk = organize_bk(ec, g, scope);
      for (EntityId i = 0; i < g.size(); ++i) {
        const auto& e = g.entity(i);
        if (e.kind == EntityKind::Class)
          EXPECT_LE(occurrences(bk, e.signature + "\n"), 1u) << c.name << " " << e.qualified_path;
        if (e.kind == EntityKind::Function || e.kind == EntityKind::Variable) EXPECT_LE(occurrences(bk, e.body + "\n"), 1u) << e.qualified_path;
      }
    }
  }
}
