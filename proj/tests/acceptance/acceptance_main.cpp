// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "repoctx/context_graph.hpp"
#include "repoctx/dataflow.hpp"
#include "repoctx/eval.hpp"
#include "repoctx/metrics.hpp"
#include "repoctx/prompt.hpp"
#include "repoctx/retrieval.hpp"
#include "repoctx/tokenizer.hpp"
#include "test_support.hpp"

using namespace repoctx;
namespace rt = repoctx::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  Outcome done(const std::string& summary) const {
    if (count_ == 0) return {true, summary};
    std::string d = std::to_string(count_) + " violation(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) d += (i ? "; " : "") + failures_[i];
    return {false, d};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

DataflowGraph dfg_of(const SourceFile& f) { return build_dfg(parse(f), f); }

DfgTriplet t(std::string h, Relation r, std::string tl) { return {{std::move(h), 1}, r, {std::move(tl), 1}}; }

std::string show(const std::set<DfgTriplet>& s) {
  std::string out;
  for (const auto& x : s) out += "(" + x.head.name + " " + std::string(relation_name(x.relation)) + " " + x.tail.name + ")";
  return out.empty() ? "{}" : out;
}

Outcome relation_table() {
  Check c;
  const std::vector<std::pair<std::string, DfgTriplet>> table = {
      {"v = u", t("u", Relation::Assigns, "v")},
      {"with f() as v", t("f", Relation::As, "v")},
      {"u.v", t("u", Relation::Refers, "u.v")},
      {"def f() -> v", t("v", Relation::Typeof, "f")},
      {"class v(u)", t("u", Relation::Inherits, "v")},
  };
  for (const auto& [code, want] : table) {
    auto got = dfg_of(rt::source(code)).triplets();
    c.expect(got == std::set<DfgTriplet>{want}, "\"" + code + "\" -> " + show(got));
  }
  return c.done("5/5 programs emit exactly their triplet");
}

Outcome fig5() {
  Check c;
  auto cases = rt::retrieval_cases();
  const auto code = rt::unfinished_of(cases.at(0));
  const auto g = dfg_of(code);
  const auto trip = g.triplets();
  auto has = [&](const std::string& h, Relation r, const std::string& tl) {
    return std::any_of(trip.begin(), trip.end(),
                       [&](const DfgTriplet& x) { return x.head.name == h && x.relation == r && x.tail.name == tl; });
  };
  c.expect(has("RecordSignal", Relation::Typeof, "signal"), "missing (RecordSignal, Typeof, signal)");
  c.expect(has("signal", Relation::Refers, "signal.getSignalByName"), "missing (signal, Refers, signal.getSignalByName)");
  c.expect(has("signal.getSignalByName", Relation::Assigns, "newSignal"),
           "missing (signal.getSignalByName, Assigns, newSignal)");
  const auto reach = rt::transitive_closure(g.size(), rt::dfg_edges(g));
  for (NodeId a = 0; a < g.size(); ++a)
    for (NodeId b = 0; b < g.size(); ++b)
      if (g.node(a).name == "newChannelName" && g.node(b).name == "newSignal")
        c.expect(!reach[a][b], "newChannelName reaches newSignal");
  return c.done("3 triplets present, newChannelName pruned");
}

Outcome retrieval_oracle() {
  Check c;
  std::size_t checked = 0;
  for (const auto& q : rt::retrieval_cases()) {
    const auto g = index_repository(rt::fixture(q.repo));
    c.expect(g.size() <= 20, q.repo + " has " + std::to_string(g.size()) + " entities");
    const auto code = analyze_unfinished(rt::unfinished_of(q));
    const std::uint32_t cursor = q.cursor.line + 1;
    const auto r = retrieve(code, cursor, g);

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
    for (std::size_t i = 0; i < r.imports.size(); ++i) {
      if (!r.resolved[i]) continue;
      const auto& info = r.imports[i];
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
    c.expect(rt::qpaths(g, r.relevant) == want_r, q.name + ": relevant differs from oracle");
    c.expect(rt::qpaths(g, r.other) == want_o, q.name + ": other differs from oracle");
    c.expect(rt::qpaths(g, r.relevant) == q.relevant, q.name + ": relevant differs from hand expectation");
    c.expect(rt::qpaths(g, r.other) == q.other, q.name + ": other differs from hand expectation");

    const auto dep_reach = rt::transitive_closure(g.size(), rt::depends_edges(g));
    for (const auto& [e, closure] : r.closure) {
      std::set<EntityId> want;
      for (EntityId j = 0; j < g.size(); ++j)
        if (dep_reach[e][j] && j != e) want.insert(j);
      c.expect(std::set<EntityId>(closure.begin(), closure.end()) == want && closure.size() == want.size(),
               q.name + ": closure of " + rt::qpath(g, e));
      ++checked;
    }
  }
  return c.done("6 queries over 5 repos, " + std::to_string(checked) + " closures");
}

Outcome generate_bk_goldens() {
  Check c;
  const auto g = index_repository(rt::fixture("cycle4"));
  c.expect(g.modules().size() == 4, "fixture must have 4 modules");
  const auto q = rt::retrieval_cases().at(1);
  const auto r = retrieve(rt::unfinished_of(q), q.cursor.line + 1, g);
  ApproxTokenizer tok;
  const auto relevant = rt::read_text(rt::golden("cycle4_relevant.txt"));
  const auto all = rt::read_text(rt::golden("cycle4_all.txt"));
  const std::vector<std::pair<std::size_t, std::string>> goldens = {{0, ""}, {128, relevant}, {512, all}, {4096, all}};
  for (const auto& [n, want] : goldens) {
    auto k = generate_bk(r.relevant, r.other, n, g, Scope::Complete, tok);
    c.expect(k.text == want, "n=" + std::to_string(n) + " differs from golden");
  }
  // Dependent modules first in every acyclic sub-case.
  std::vector<EntityId> pool;
  for (EntityId i = 0; i < g.size(); ++i)
    if (g.entity(i).kind != EntityKind::Module) pool.push_back(i);
  const auto reach = rt::transitive_closure(g.size(), rt::depends_edges(g));
  std::size_t acyclic = 0;
  for (unsigned mask = 1; mask < (1u << pool.size()); ++mask) {
    std::vector<EntityId> ec;
    for (std::size_t b = 0; b < pool.size(); ++b)
      if (mask & (1u << b)) ec.push_back(pool[b]);
    std::set<EntityId> members(ec.begin(), ec.end());
    for (EntityId e : ec)
      for (EntityId j = 0; j < g.size(); ++j)
        if (reach[e][j]) members.insert(j);
    std::set<std::pair<EntityId, EntityId>> edges;
    std::set<EntityId> mods;
    for (EntityId e : members) {
      mods.insert(g.module_of(e));
      for (EntityId d : g.depends(e))
        if (members.contains(d) && g.module_of(d) != g.module_of(e)) edges.emplace(g.module_of(e), g.module_of(d));
    }
    std::vector<EntityId> mv(mods.begin(), mods.end());
    std::vector<rt::Edge> idx;
    for (auto [a, b] : edges)
      idx.emplace_back(std::find(mv.begin(), mv.end(), a) - mv.begin(), std::find(mv.begin(), mv.end(), b) - mv.begin());
    if (!rt::topologically_sortable(mv.size(), idx)) continue;
    ++acyclic;
    const auto bk = organize_bk(ec, g, Scope::Complete);
    for (auto [m1, m2] : edges) {
      const auto p1 = bk.find("# " + g.entity(m1).file_path + "\n");
      const auto p2 = bk.find("# " + g.entity(m2).file_path + "\n");
      c.expect(p1 != std::string::npos && p2 != std::string::npos && p2 < p1,
               "mask " + std::to_string(mask) + ": " + g.entity(m2).file_path + " after " + g.entity(m1).file_path);
    }
  }
  return c.done("4 budgets byte-exact, " + std::to_string(acyclic) + " acyclic sub-cases ordered");
}

Outcome budget_safety() {
  Check c;
  rt::TempDir dir;
  rt::write_synthetic_repo(dir.path(), 25, 100, 1234);
  const auto g = index_repository(dir.path());
  std::mt19937 rng(99);
  std::size_t with_other = 0;
  for (unsigned i = 0; i < 1000; ++i) {
    const auto code = rt::random_query(20000 + i, 25);
    const std::size_t total = std::uniform_int_distribution<std::size_t>(64, 4096)(rng);
    const auto tok = make_tokenizer(i % 2 ? "approx" : "char");
    const Scope scope = i % 3 ? Scope::Complete : Scope::Definition;
    const auto plan = build_prompt(code, g, {total, scope}, *tok);
    const std::string id = "#" + std::to_string(i);
    c.expect(tok->count(plan.final_prompt) <= total, id + " final prompt over budget");
    if (plan.knowledge.accepted_other > 0) {
      ++with_other;
      std::vector<EntityId> ec = plan.retrieval.relevant;
      ec.insert(ec.end(), plan.retrieval.other.begin(), plan.retrieval.other.begin() + plan.knowledge.accepted_other);
      c.expect(!plan.knowledge.truncated && plan.knowledge.text == organize_bk(ec, g, scope),
               id + " relevant text truncated while other entities included");
      c.expect(plan.final_prompt.starts_with("'''\n" + plan.knowledge.text), id + " knowledge not placed first");
    }
  }
  return c.done("1000 instances, " + std::to_string(with_other) + " with other imports, 0 violations");
}

Outcome metrics() {
  Check c;
  const double es = edit_similarity("channel = newChannelName", "setSignalTypeFromTypeStr()");
  c.expect(std::fabs(es - 0.24) <= 0.005, "ES = " + std::to_string(es));
  // Listed examples against a full-table Levenshtein oracle over max length.
  auto lev_es = [](std::string_view a, std::string_view b) {
    const auto m = std::max(a.size(), b.size());
    return m == 0 ? 1.0 : 1.0 - double(rt::levenshtein_dp(a, b)) / double(m);
  };
  c.expect(edit_similarity("abc", "abc") == 1.0 && lev_es("abc", "abc") == 1.0, "ES(abc, abc)");
  c.expect(std::fabs(edit_similarity("abc", "abd") - lev_es("abc", "abd")) < 1e-12 &&
               std::fabs(lev_es("abc", "abd") - 2.0 / 3.0) < 1e-12,
           "ES(abc, abd)");
  c.expect(edit_similarity("", "abcd") == lev_es("", "abcd") && lev_es("", "abcd") == 0.0, "ES('', abcd)");
  auto f1 = [](std::set<std::string> a, std::set<std::string> b) {
    std::size_t common = 0;
    for (const auto& x : a) common += b.count(x);
    const double p = double(common) / a.size(), r = double(common) / b.size();
    return common == 0 ? 0.0 : 2 * p * r / (p + r);
  };
  auto same = identifier_metrics("foo.bar(x)", "foo.bar(x)");
  c.expect(same.id_em == 1 && same.f1 == 1.0, "ids(foo.bar(x), foo.bar(x))");
  auto diff = identifier_metrics("foo.bar(x)", "foo.baz(x)");
  c.expect(diff.id_em == 0 && std::fabs(diff.f1 - f1({"foo", "bar", "x"}, {"foo", "baz", "x"})) < 1e-12 &&
               std::fabs(diff.f1 - 2.0 / 3.0) < 1e-12,
           "ids(foo.bar(x), foo.baz(x))");
  auto swapped = identifier_metrics("a(b)", "b(a)");
  c.expect(swapped.id_em == 0 && swapped.f1 == f1({"a", "b"}, {"b", "a"}) && swapped.f1 == 1.0, "ids(a(b), b(a))");
  std::ostringstream s;
  s.precision(4);
  s << "ES = " << es;
  return c.done(s.str());
}

Outcome latency() {
  Check c;
  rt::TempDir repo;
  rt::write_synthetic_repo(repo.path(), 25, 100, 4242);
  const auto g = index_repository(repo.path());
  ApproxTokenizer tok;
  std::vector<double> ms;
  std::size_t lines = 0;
  for (int round = 0; round < 4; ++round) {
    for (const auto& rel : discover_sources(repo.path())) {
      if (rel == "gen/__init__.py") continue;
      const auto full = rt::read_text(repo.path() / rel);
      // Cut in the middle of the last line.
      auto end = full.find_last_not_of('\n');
      auto line_start = full.rfind('\n', end) + 1;
      auto code = SourceFile::from_text(rel, full.substr(0, line_start + (end - line_start) / 2));
      lines += code.line_count;
      ms.push_back(build_prompt(code, g, {}, tok).elapsed_ms);
    }
  }
  const auto stats = timing_stats(ms);
  c.expect(stats.mean <= 200.0, "mean " + std::to_string(stats.mean) + " ms");
  c.expect(stats.p95 <= 500.0, "p95 " + std::to_string(stats.p95) + " ms");

  rt::TempDir big;
  rt::write_synthetic_repo(big.path(), 30, 100, 77);
  const auto t0 = std::chrono::steady_clock::now();
  const auto g30 = index_repository(big.path());
  const double index_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  c.expect(g30.modules().size() == 31, "30-file repo must index 30 files and its package");
  c.expect(index_ms <= 2000.0, "indexing " + std::to_string(index_ms) + " ms");
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << ms.size() << " prompts (avg " << lines / ms.size() << " lines): mean " << stats.mean << " ms, p95 "
    << stats.p95 << " ms; 30-file index " << index_ms << " ms";
  return c.done(s.str());
}

Outcome persistence() {
  Check c;
  rt::TempDir dir;
  auto repos = rt::fixture_repos();
  rt::write_synthetic_repo(dir.path() / "synthetic", 25, 100, 5);
  std::size_t n = 0;
  for (const auto& repo : repos) {
    const auto g = index_repository(rt::fixture(repo));
    save_graph(g, dir.path() / (repo + ".graph"));
    c.expect(load_graph(dir.path() / (repo + ".graph")) == g, repo);
    ++n;
  }
  const auto s = index_repository(dir.path() / "synthetic");
  save_graph(s, dir.path() / "s.graph");
  c.expect(load_graph(dir.path() / "s.graph") == s, "synthetic");
  const ContextGraph empty;
  save_graph(empty, dir.path() / "e.graph");
  c.expect(load_graph(dir.path() / "e.graph") == empty, "empty");
  return c.done(std::to_string(n + 2) + " graphs structurally equal after reload");
}

Outcome determinism() {
  Check c;
  ApproxTokenizer tok;
  std::size_t prompts = 0;
  for (const auto& q : rt::retrieval_cases()) {
    std::string first_stats, first_prompt;
    for (int run = 0; run < 2; ++run) {
      const auto g = run == 0 ? index_repository(rt::fixture(q.repo)) : index_repository(rt::fixture(q.repo), {3});
      const auto st = format_stats(stats_of(g));
      std::string prompt;
      for (auto scope : {Scope::Complete, Scope::Definition})
        for (std::size_t total : {64u, 512u, 2048u}) prompt += build_prompt(rt::unfinished_of(q), g, {total, scope}, tok).final_prompt;
      if (run == 0) {
        first_stats = st;
        first_prompt = prompt;
      } else {
        c.expect(st == first_stats, q.name + " stats differ");
        c.expect(prompt == first_prompt, q.name + " prompts differ");
      }
    }
    prompts += 6;
  }
  return c.done(std::to_string(prompts) + " prompt pairs and stats byte-identical");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_ms;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"relation-table", 1000, relation_table},
      {"fig5-reconstruction", 1000, fig5},
      {"retrieval-oracle", 5000, retrieval_oracle},
      {"generate-bk-goldens", 2000, generate_bk_goldens},
      {"budget-safety", 0, budget_safety},
      {"metric-conformance", 1000, metrics},
      {"latency", 0, latency},
      {"persistence-round-trip", 1000, persistence},
      {"determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_ms > 0 && ms > c.budget_ms) {
      o.pass = false;
      o.detail += " (took " + std::to_string(ms) + " ms, limit " + std::to_string(c.budget_ms) + " ms)";
    }
    std::printf("%s %-24s %8.1f ms  %s\n", o.pass ? "PASS" : "FAIL", c.name, ms, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
