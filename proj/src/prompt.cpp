#include "repoctx/prompt.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace repoctx {

std::string_view scope_name(Scope s) noexcept { return s == Scope::Definition ? "definition" : "complete"; }

Scope parse_scope(std::string_view name) {
  if (name == "definition") return Scope::Definition;
  if (name == "complete") return Scope::Complete;
  throw std::invalid_argument("unknown scope: " + std::string(name));
}

TokenBudget allocate(std::size_t total, std::size_t knowledge_len, std::size_t code_len) {
  const std::size_t half_knowledge = total / 2;
  const std::size_t half_code = total - half_knowledge;
  TokenBudget b{total, half_knowledge, half_code};
  if (code_len < half_code) {
    b.code_alloc = code_len;
    b.knowledge_alloc = total - code_len;
  } else if (knowledge_len < half_knowledge) {
    b.knowledge_alloc = knowledge_len;
    b.code_alloc = total - knowledge_len;
  }
  return b;
}

namespace {

std::string line(std::string_view s) {
  std::string out(s);
  if (out.empty() || out.back() != '\n') out += '\n';
  return out;
}

std::string header_and_doc(const CodeEntity& e) {
  std::string out = line(e.signature);
  if (e.docstring) out += line(*e.docstring);
  return out;
}

using Selection = std::set<EntityId>;

class Renderer {
 public:
  Renderer(const ContextGraph& g, Scope scope) : g_(g), scope_(scope) {}

  std::string entity(EntityId id) const {
    const auto& e = g_.entity(id);
    switch (e.kind) {
      case EntityKind::Module:
        return e.docstring ? line(*e.docstring) : std::string();
      case EntityKind::Variable:
        return line(e.body);
      case EntityKind::Function: {
        std::string complete = line(e.body);
        if (scope_ == Scope::Complete) return complete;
        std::string def = header_and_doc(e) + e.body_indent + "...\n";
        return def.size() < complete.size() ? def : complete;
      }
      case EntityKind::Class: {
        std::string members;
        for (EntityId c : g_.children(id)) members += entity(c);
        std::string out = header_and_doc(e);
        if (members.empty() && !e.docstring) return out + e.body_indent + "...\n";
        return out + members;
      }
    }
    return {};
  }

  // Selected entities under `id`, with unselected ancestors reduced to
  // their header and docstring.
  std::string tree(EntityId id, const Selection& selected, const Selection& shells) const {
    if (selected.contains(id)) {
      std::string out = entity(id);
      if (g_.entity(id).kind != EntityKind::Module) return out;
      for (EntityId c : g_.children(id)) out += tree(c, selected, shells);
      return out;
    }
    if (!shells.contains(id)) return {};
    const auto& e = g_.entity(id);
    std::string out = e.kind == EntityKind::Module ? std::string() : header_and_doc(e);
    for (EntityId c : g_.children(id)) out += tree(c, selected, shells);
    return out;
  }

 private:
  const ContextGraph& g_;
  Scope scope_;
};

struct Grouping {
  std::vector<EntityId> all;  // entities with closures, first-seen order
  std::vector<EntityId> ranked_modules;
};

Grouping gather(const std::vector<EntityId>& entities, const ContextGraph& graph) {
  Grouping out;
  std::set<EntityId> seen;
  std::set<EntityId> ranked;
  for (EntityId e : entities) {
    if (seen.insert(e).second) out.all.push_back(e);
    for (EntityId d : dependency_closure(e, graph)) {
      if (seen.insert(d).second) out.all.push_back(d);
    }
    if (ranked.insert(graph.module_of(e)).second) out.ranked_modules.push_back(graph.module_of(e));
  }
  return out;
}

std::vector<EntityId> order_modules(const Grouping& grp, const ContextGraph& graph) {
  std::set<EntityId> modules;
  for (EntityId e : grp.all) modules.insert(graph.module_of(e));
  std::map<EntityId, std::set<EntityId>> preds;
  const std::set<EntityId> in_set(grp.all.begin(), grp.all.end());
  for (EntityId e : grp.all) {
    for (EntityId d : graph.depends(e)) {
      if (!in_set.contains(d)) continue;
      EntityId m1 = graph.module_of(e);
      EntityId m2 = graph.module_of(d);
      if (m1 != m2) preds[m2].insert(m1);
    }
  }

  constexpr std::size_t kUnranked = std::numeric_limits<std::size_t>::max();
  std::map<EntityId, std::size_t> priority;
  for (EntityId m : modules) priority[m] = kUnranked;
  std::size_t rank = 1;
  std::set<EntityId> ranked;
  for (EntityId m : grp.ranked_modules) {
    priority[m] = rank++;
    ranked.insert(m);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (EntityId m : modules) {
      if (ranked.contains(m)) continue;
      std::size_t best = priority[m];
      for (EntityId p : preds[m]) best = std::min(best, priority[p]);
      if (best < priority[m]) {
        priority[m] = best;
        changed = true;
      }
    }
  }

  std::vector<EntityId> popped;
  std::set<EntityId> remaining = modules;
  while (!remaining.empty()) {
    std::optional<EntityId> pick;
    std::size_t pick_preds = 0;
    for (EntityId m : remaining) {
      std::size_t n = 0;
      for (EntityId p : preds[m]) n += remaining.contains(p) ? 1 : 0;
      bool better = false;
      if (!pick || n < pick_preds) {
        better = true;
      } else if (n == pick_preds) {
        const std::size_t a = priority[m];
        const std::size_t b = priority[*pick];
        // Larger rank number first; unranked never occurs for reachable modules.
        if (a != b) {
          better = a != kUnranked && (b == kUnranked || a > b);
        } else {
          better = graph.entity(m).file_path < graph.entity(*pick).file_path;
        }
      }
      if (better) {
        pick = m;
        pick_preds = n;
      }
    }
    popped.push_back(*pick);
    remaining.erase(*pick);
  }
  std::reverse(popped.begin(), popped.end());
  return popped;
}

}  // namespace

std::string render_entity(const ContextGraph& graph, EntityId id, Scope scope) {
  return Renderer(graph, scope).entity(id);
}

std::vector<EntityId> module_order(const std::vector<EntityId>& entities, const ContextGraph& graph) {
  return order_modules(gather(entities, graph), graph);
}

std::string organize_bk(const std::vector<EntityId>& entities, const ContextGraph& graph, Scope scope) {
  if (entities.empty()) return {};
  const Grouping grp = gather(entities, graph);
  Selection chosen(grp.all.begin(), grp.all.end());
  Selection selected;
  Selection shells;
  for (EntityId e : grp.all) {
    bool merged = false;
    for (auto p = graph.parent(e); p; p = graph.parent(*p)) {
      if (graph.entity(*p).kind != EntityKind::Module && chosen.contains(*p)) {
        merged = true;
        break;
      }
    }
    if (merged) continue;
    selected.insert(e);
    for (auto p = graph.parent(e); p; p = graph.parent(*p)) shells.insert(*p);
  }
  const Renderer r(graph, scope);
  std::string out;
  for (EntityId m : order_modules(grp, graph)) {
    const auto& me = graph.entity(m);
    out += "# " + (me.synthetic ? me.file_path + "/" : me.file_path) + "\n";
    out += r.tree(m, selected, shells);
  }
  return out;
}

Knowledge generate_bk(const std::vector<EntityId>& relevant, const std::vector<EntityId>& other, std::size_t n,
                      const ContextGraph& graph, Scope scope, const Tokenizer& tokenizer) {
  Knowledge k;
  std::vector<EntityId> current = relevant;
  k.text = organize_bk(current, graph, scope);
  for (EntityId e : other) {
    current.push_back(e);
    std::string candidate = organize_bk(current, graph, scope);
    if (tokenizer.count(candidate) > n) break;
    k.text = std::move(candidate);
    ++k.accepted_other;
  }
  if (tokenizer.count(k.text) > n) {
    k.text = std::string(tokenizer.head(k.text, n));
    k.truncated = true;
  }
  return k;
}

std::string wrap_knowledge(std::string_view bk) { return "'''\n" + line(bk) + "'''\n"; }

SourceFile unfinished_prefix(const SourceFile& file, Position cursor) {
  return SourceFile::from_text(file.repo_relative_path, file.text.substr(0, offset_of(file.text, cursor)));
}

PromptPlan build_prompt(const SourceFile& unfinished, const ContextGraph& graph, const PromptOptions& options,
                        const Tokenizer& tokenizer) {
  const auto t0 = std::chrono::steady_clock::now();
  PromptPlan plan;
  plan.scope = options.scope;
  const auto code = analyze_unfinished(unfinished);
  const std::uint32_t cursor_line = end_position(unfinished.text).line + 1;
  plan.retrieval = retrieve(code, cursor_line, graph);

  const auto& r = plan.retrieval;
  std::vector<EntityId> all = r.relevant;
  all.insert(all.end(), r.other.begin(), r.other.end());
  plan.module_order = module_order(all, graph);
  const std::size_t overhead = tokenizer.count("'''\n") + tokenizer.count("\n'''\n");
  std::size_t knowledge_need = 0;
  if (!all.empty()) knowledge_need = tokenizer.count(organize_bk(all, graph, options.scope)) + overhead;
  const std::size_t code_len = tokenizer.count(unfinished.text);
  plan.budget = allocate(options.max_tokens, knowledge_need, code_len);

  const std::size_t n =
      all.empty() || plan.budget.knowledge_alloc <= overhead ? 0 : plan.budget.knowledge_alloc - overhead;
  plan.knowledge = generate_bk(r.relevant, r.other, n, graph, options.scope, tokenizer);
  plan.code_suffix = std::string(tokenizer.tail(unfinished.text, plan.budget.code_alloc));

  auto assemble = [&] {
    plan.final_prompt = plan.knowledge.text.empty() ? plan.code_suffix
                                                    : wrap_knowledge(plan.knowledge.text) + plan.code_suffix;
    plan.prompt_tokens = tokenizer.count(plan.final_prompt);
  };
  assemble();
  // Boundary effects of a foreign tokenizer can still overshoot; code gives way first.
  while (plan.prompt_tokens > options.max_tokens && !plan.code_suffix.empty()) {
    const std::size_t have = tokenizer.count(plan.code_suffix);
    const std::size_t excess = plan.prompt_tokens - options.max_tokens;
    plan.code_suffix = std::string(tokenizer.tail(plan.code_suffix, have > excess ? have - excess : 0));
    assemble();
  }
  while (plan.prompt_tokens > options.max_tokens && !plan.knowledge.text.empty()) {
    const std::size_t have = tokenizer.count(plan.knowledge.text);
    const std::size_t excess = plan.prompt_tokens - options.max_tokens;
    plan.knowledge.text = std::string(tokenizer.head(plan.knowledge.text, have > excess ? have - excess : 0));
    plan.knowledge.truncated = true;
    assemble();
  }
  plan.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return plan;
}

}  // namespace repoctx
