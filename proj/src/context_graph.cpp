#include "repoctx/context_graph.hpp"

#include <algorithm>
#include <sstream>

namespace repoctx {

std::string_view kind_name(EntityKind k) noexcept {
  switch (k) {
    case EntityKind::Module:
      return "module";
    case EntityKind::Class:
      return "class";
    case EntityKind::Function:
      return "function";
    case EntityKind::Variable:
      return "variable";
  }
  return "?";
}

std::optional<EntityKind> parse_kind(std::string_view name) noexcept {
  for (auto k : {EntityKind::Module, EntityKind::Class, EntityKind::Function, EntityKind::Variable}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> split_dotted(std::string_view s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto dot = s.find('.', start);
    out.emplace_back(s.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return out;
}

std::string dirname_of(std::string_view path) {
  auto slash = path.rfind('/');
  return slash == std::string_view::npos ? std::string() : std::string(path.substr(0, slash));
}

std::string join_path(const std::string& dir, std::string_view tail) {
  return dir.empty() ? std::string(tail) : dir + "/" + std::string(tail);
}

}  // namespace

EntityId ContextGraph::add_entity(CodeEntity e, std::optional<EntityId> parent) {
  const auto id = static_cast<EntityId>(entities_.size());
  by_path_.emplace(e.qualified_path, id);
  if (e.kind == EntityKind::Module) modules_by_file_.emplace(e.file_path, id);
  entities_.push_back(std::move(e));
  parents_.push_back(parent);
  children_.emplace_back();
  depends_.emplace_back();
  if (parent) children_.at(*parent).push_back(id);
  return id;
}

void ContextGraph::add_depends(EntityId from, EntityId to) {
  if (from == to || from >= entities_.size() || to >= entities_.size()) return;
  depends_[from].push_back(to);
}

void ContextGraph::finalize() {
  for (auto& c : children_) {
    std::stable_sort(c.begin(), c.end(),
                     [&](EntityId a, EntityId b) { return entities_[a].start_line < entities_[b].start_line; });
  }
  for (auto& d : depends_) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
}

std::optional<EntityId> ContextGraph::find(std::string_view qualified_path) const {
  auto it = by_path_.find(qualified_path);
  if (it == by_path_.end()) return std::nullopt;
  return it->second;
}

std::optional<EntityId> ContextGraph::parent(EntityId id) const { return parents_.at(id); }

std::span<const EntityId> ContextGraph::children(EntityId id) const { return children_.at(id); }

std::span<const EntityId> ContextGraph::depends(EntityId id) const { return depends_.at(id); }

EntityId ContextGraph::module_of(EntityId id) const {
  while (parents_.at(id)) id = *parents_[id];
  return id;
}

std::optional<EntityId> ContextGraph::module_at(std::string_view path) const {
  auto it = modules_by_file_.find(path);
  if (it == modules_by_file_.end()) return std::nullopt;
  return it->second;
}

std::vector<EntityId> ContextGraph::modules() const {
  std::vector<EntityId> out;
  for (EntityId i = 0; i < entities_.size(); ++i) {
    if (entities_[i].kind == EntityKind::Module) out.push_back(i);
  }
  return out;
}

std::size_t ContextGraph::contains_count() const {
  std::size_t n = 0;
  for (const auto& c : children_) n += c.size();
  return n;
}

std::size_t ContextGraph::depends_count() const {
  std::size_t n = 0;
  for (const auto& d : depends_) n += d.size();
  return n;
}

std::optional<EntityId> ContextGraph::child_named(EntityId parent, std::string_view name) const {
  std::optional<EntityId> best;
  for (EntityId c : children_.at(parent)) {
    const auto& e = entities_[c];
    const bool match = e.name == name || std::find(e.aliases.begin(), e.aliases.end(), name) != e.aliases.end();
    if (match && (!best || e.start_line < entities_[*best].start_line)) best = c;
  }
  return best;
}

std::optional<std::string> ContextGraph::package_dir(EntityId module) const {
  const auto& e = entities_.at(module);
  if (e.kind != EntityKind::Module) return std::nullopt;
  if (e.synthetic) return e.file_path;
  if (e.file_path == "__init__.py") return std::string();
  if (e.file_path.ends_with("/__init__.py")) return e.file_path.substr(0, e.file_path.size() - 12);
  return std::nullopt;
}

std::optional<EntityId> ContextGraph::module_in_dir(const std::string& dir, const std::string& segment) const {
  const std::string p = join_path(dir, segment);
  if (auto m = module_at(p + "/__init__.py")) return m;
  if (auto m = module_at(p + ".py")) return m;
  if (auto m = module_at(p); m && entities_[*m].synthetic) return m;
  return std::nullopt;
}

bool ContextGraph::has_top_level(std::string_view head) const {
  return !head.empty() && module_in_dir(std::string(), std::string(head)).has_value();
}

std::optional<Resolution> ContextGraph::resolve(std::string_view importer_path, std::uint32_t level,
                                                std::string_view module, std::string_view name) const {
  std::vector<std::string> bases;
  if (level > 0) {
    std::string d = dirname_of(importer_path);
    for (std::uint32_t i = 1; i < level; ++i) {
      if (d.empty()) return std::nullopt;
      d = dirname_of(d);
    }
    bases.push_back(d);
  } else {
    if (module.empty()) return std::nullopt;
    bases.emplace_back();
    for (std::string d = dirname_of(importer_path); !d.empty(); d = dirname_of(d)) bases.push_back(d);
  }

  const auto module_segments = split_dotted(module);
  const auto name_segments = split_dotted(name);

  for (const auto& base : bases) {
    // Cursor is either an entity or, for a package root without a module
    // entity, a bare directory.
    std::optional<EntityId> at;
    std::optional<std::string> dir = base;
    if (!base.empty()) {
      if (auto m = module_at(base + "/__init__.py")) {
        at = m;
      } else if (auto s = module_at(base); s && entities_[*s].synthetic) {
        at = s;
      }
    } else if (auto m = module_at("__init__.py")) {
      at = m;
    }
    bool ok = true;
    for (const auto& seg : module_segments) {
      std::optional<std::string> from_dir = at ? package_dir(*at) : dir;
      if (!at && !dir) from_dir = std::nullopt;
      if (!from_dir) {
        ok = false;
        break;
      }
      auto next = module_in_dir(*from_dir, seg);
      if (!next) {
        ok = false;
        break;
      }
      at = next;
      dir.reset();
    }
    if (!ok) continue;

    bool exact = true;
    for (const auto& seg : name_segments) {
      std::optional<EntityId> next;
      if (at) next = child_named(*at, seg);
      if (!next) {
        std::optional<std::string> from_dir = at ? package_dir(*at) : dir;
        if (from_dir) next = module_in_dir(*from_dir, seg);
      }
      if (!next) {
        exact = false;
        break;
      }
      at = next;
      dir.reset();
    }
    if (!at) return std::nullopt;
    return Resolution{*at, exact};
  }
  return std::nullopt;
}

bool operator==(const ContextGraph& a, const ContextGraph& b) {
  return a.entities_ == b.entities_ && a.parents_ == b.parents_ && a.children_ == b.children_ &&
         a.depends_ == b.depends_ && a.diagnostics_ == b.diagnostics_ && a.root_ == b.root_;
}

GraphStats stats_of(const ContextGraph& graph) {
  GraphStats s;
  for (auto k : {EntityKind::Module, EntityKind::Class, EntityKind::Function, EntityKind::Variable}) s.entities[k] = 0;
  for (const auto& e : graph.entities()) ++s.entities[e.kind];
  s.contains = graph.contains_count();
  s.depends = graph.depends_count();
  s.diagnostics = graph.diagnostics().size();
  return s;
}

std::string format_stats(const GraphStats& s) {
  std::ostringstream out;
  auto count = [&](EntityKind k) {
    auto it = s.entities.find(k);
    return it == s.entities.end() ? std::size_t{0} : it->second;
  };
  out << "modules " << count(EntityKind::Module) << '\n';
  out << "classes " << count(EntityKind::Class) << '\n';
  out << "functions " << count(EntityKind::Function) << '\n';
  out << "variables " << count(EntityKind::Variable) << '\n';
  out << "contains " << s.contains << '\n';
  out << "depends " << s.depends << '\n';
  out << "diagnostics " << s.diagnostics << '\n';
  return out.str();
}

}  // namespace repoctx
