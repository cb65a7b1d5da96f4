#include "repoctx/retrieval.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace repoctx {

std::string ImportInfo::display() const {
  std::string out = "(" + std::string(level, '.') + module + ", " + (star ? std::string("*") : name) + ")";
  return out;
}

UnfinishedCode analyze_unfinished(const SourceFile& file) {
  auto tree = parse(file);
  UnfinishedCode code{file, build_dfg(tree, file), extract_imports(tree)};
  return code;
}

std::vector<ImportInfo> collect_imports(const SourceFile& file) { return collect_imports(analyze_unfinished(file)); }

std::vector<ImportInfo> collect_imports(const UnfinishedCode& code) {
  std::vector<ImportInfo> out;
  std::map<std::tuple<std::uint32_t, std::string, std::string, std::uint32_t>, std::size_t> seen;
  auto add = [&](const ImportBinding& b, const ImportTarget& t, const std::vector<NodeId>& nodes) {
    auto key = std::make_tuple(t.level, t.module, t.name, b.line);
    auto it = seen.find(key);
    if (it == seen.end()) {
      it = seen.emplace(key, out.size()).first;
      out.push_back({t.level, t.module, t.name, b.line, false, {}});
    }
    for (NodeId n : nodes) out[it->second].support.insert(code.graph.node(n));
  };

  const auto& g = code.graph;
  for (const auto& b : code.imports) {
    if (b.star()) {
      ImportInfo info{b.level, b.module, "", b.line, true, {}};
      out.push_back(std::move(info));
      continue;
    }
    std::map<std::string, std::vector<NodeId>> names;
    if (auto root = g.find({b.alias, b.line})) names = propagate_names(g, *root, b.alias);
    for (const auto& n : expand_refers(g, b.alias)) {
      auto& nodes = names[n];
      for (NodeId i = 0; i < g.size(); ++i) {
        if (g.node(i).name == n && g.node(i).line >= b.line) nodes.push_back(i);
      }
    }
    if (names.empty()) names[b.alias];
    for (const auto& [usage, nodes] : names) {
      if (auto t = import_target(b, usage)) add(b, *t, nodes);
    }
  }
  return out;
}

std::optional<EntityId> resolve(const ImportInfo& info, std::string_view importer_path, const ContextGraph& graph) {
  auto r = graph.resolve(importer_path, info.level, info.module, info.star ? std::string_view() : info.name);
  if (!r) return std::nullopt;
  return r->entity;
}

std::vector<EntityId> dependency_closure(EntityId entity, const ContextGraph& graph) {
  std::vector<EntityId> out;
  std::vector<bool> seen(graph.size(), false);
  seen[entity] = true;
  std::vector<std::pair<EntityId, std::size_t>> stack{{entity, 0}};
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    auto deps = graph.depends(id);
    if (next >= deps.size()) {
      stack.pop_back();
      continue;
    }
    EntityId d = deps[next++];
    if (seen[d]) continue;
    seen[d] = true;
    out.push_back(d);
    stack.emplace_back(d, 0);
  }
  return out;
}

RetrievalResult retrieve(const SourceFile& unfinished, std::uint32_t cursor_line, const ContextGraph& graph) {
  return retrieve(analyze_unfinished(unfinished), cursor_line, graph);
}

RetrievalResult retrieve(const UnfinishedCode& code, std::uint32_t cursor_line, const ContextGraph& graph) {
  RetrievalResult r;
  r.imports = collect_imports(code);
  const auto deps = last_line_dependencies(code.graph, cursor_line);
  std::set<std::string> dep_names;
  for (const auto& n : deps) dep_names.insert(n.name.substr(0, n.name.find('.')));

  struct Candidate {
    std::uint32_t line = 0;
    bool relevant = false;
  };
  std::map<EntityId, Candidate> found;
  auto offer = [&](EntityId e, std::uint32_t line, bool relevant) {
    auto [it, inserted] = found.try_emplace(e, Candidate{line, relevant});
    if (!inserted) {
      it->second.line = std::min(it->second.line, line);
      it->second.relevant = it->second.relevant || relevant;
    }
  };

  const auto& path = code.file.repo_relative_path;
  for (const auto& info : r.imports) {
    auto e = resolve(info, path, graph);
    r.resolved.push_back(e);
    if (!e) continue;
    if (info.star) {
      if (graph.entity(*e).kind != EntityKind::Module) continue;
      for (EntityId c : graph.children(*e)) offer(c, info.origin_line, dep_names.contains(graph.entity(c).name));
      continue;
    }
    const bool relevant = std::any_of(info.support.begin(), info.support.end(),
                                      [&](const DfgNode& n) { return deps.contains(n); });
    offer(*e, info.origin_line, relevant);
  }

  std::vector<std::pair<Candidate, EntityId>> ordered;
  for (const auto& [e, c] : found) ordered.emplace_back(c, e);
  std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
    if (a.first.line != b.first.line) return a.first.line < b.first.line;
    return graph.entity(a.second).qualified_path < graph.entity(b.second).qualified_path;
  });
  for (const auto& [c, e] : ordered) {
    (c.relevant ? r.relevant : r.other).push_back(e);
    r.closure[e] = dependency_closure(e, graph);
  }
  return r;
}

std::string format_retrieval(const RetrievalResult& r, const ContextGraph& graph) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.imports.size(); ++i) {
    const auto& info = r.imports[i];
    out << "import " << info.origin_line << ' ' << info.display() << " -> "
        << (r.resolved[i] ? graph.entity(*r.resolved[i]).qualified_path : std::string("external")) << '\n';
  }
  auto list = [&](const char* label, const std::vector<EntityId>& ids) {
    for (EntityId e : ids) {
      out << label << ' ' << graph.entity(e).qualified_path;
      for (EntityId d : r.closure.at(e)) out << ' ' << graph.entity(d).qualified_path;
      out << '\n';
    }
  };
  list("relevant", r.relevant);
  list("other", r.other);
  return out.str();
}

}  // namespace repoctx
