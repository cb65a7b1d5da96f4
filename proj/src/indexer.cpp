#include <omp.h>

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>

#include "repoctx/context_graph.hpp"
#include "repoctx/dataflow.hpp"
#include "repoctx/error.hpp"
#include "repoctx/syntax.hpp"

namespace repoctx {

namespace {

std::string module_name(std::string_view path) {
  auto slash = path.rfind('/');
  std::string_view file = slash == std::string_view::npos ? path : path.substr(slash + 1);
  if (file == "__init__.py") {
    if (slash == std::string_view::npos) return "__init__";
    auto dir = path.substr(0, slash);
    auto s2 = dir.rfind('/');
    return std::string(s2 == std::string_view::npos ? dir : dir.substr(s2 + 1));
  }
  if (file.ends_with(".py")) file.remove_suffix(3);
  return std::string(file);
}

std::vector<std::string> split_dots(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto dot = s.find('.', start);
    out.emplace_back(s.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return out;
}

class FileIndexer {
 public:
  FileIndexer(const SourceFile& file, const SyntaxTree& tree) : file_(file), tree_(tree), text_(tree.text()) {}

  FileIndex run() {
    out_.path = file_.repo_relative_path;
    CodeEntity m;
    m.kind = EntityKind::Module;
    m.name = module_name(file_.repo_relative_path);
    m.qualified_path = file_.repo_relative_path;
    m.file_path = file_.repo_relative_path;
    m.end_line = file_.line_count;
    auto root = tree_.root();
    if (auto doc = docstring_node(root)) m.docstring = indented(*doc);
    push(std::move(m), std::nullopt, {});

    visit_block(root, 0, EntityKind::Module);

    graph_ = build_dfg(tree_, file_);
    out_.imports = extract_imports(tree_);
    for (const auto& b : out_.imports) {
      if (b.star()) out_.pending.push_back({0, ImportTarget{b.level, b.module, ""}, false});
    }
    for (std::uint32_t i = 1; i < out_.entities.size(); ++i) link_interface(i);
    std::sort(out_.depends.begin(), out_.depends.end());
    out_.depends.erase(std::unique(out_.depends.begin(), out_.depends.end()), out_.depends.end());
    return std::move(out_);
  }

 private:
  struct Interface {
    std::vector<DfgNode> nodes;
    std::vector<Relation> relations;
  };

  std::uint32_t push(CodeEntity e, std::optional<std::uint32_t> parent, Interface iface) {
    const auto id = static_cast<std::uint32_t>(out_.entities.size());
    if (parent) {
      std::string base = out_.entities[*parent].qualified_path;
      base += out_.entities[*parent].kind == EntityKind::Module ? ":" : ".";
      e.qualified_path = base + e.name;
      if (!used_.insert(e.qualified_path).second) {
        e.qualified_path += "@" + std::to_string(e.start_line);
        used_.insert(e.qualified_path);
      }
    }
    out_.entities.push_back(std::move(e));
    out_.parents.push_back(parent);
    children_.emplace_back();
    if (parent) children_[*parent].push_back(id);
    interfaces_.push_back(std::move(iface));
    return id;
  }

  std::string_view line_prefix(const SyntaxNode& n) const {
    const std::size_t start = n.start_byte();
    std::size_t ls = 0;
    if (start > 0) {
      auto nl = text_.rfind('\n', start - 1);
      if (nl != std::string::npos) ls = nl + 1;
    }
    return std::string_view(text_).substr(ls, start - ls);
  }

  std::string indent_of(const SyntaxNode& n) const {
    auto p = line_prefix(n);
    if (std::all_of(p.begin(), p.end(), [](char c) { return c == ' ' || c == '\t'; })) return std::string(p);
    return std::string(p.size(), ' ');
  }

  std::string indented(const SyntaxNode& n) const { return indent_of(n) + std::string(n.text()); }

  std::string header_through_colon(const SyntaxNode& outer, const SyntaxNode& def) const {
    std::uint32_t end = def.end_byte();
    for (const auto& c : def.children()) {
      if (c.is(":")) {
        end = c.end_byte();
        break;
      }
    }
    return indent_of(outer) + text_.substr(outer.start_byte(), end - outer.start_byte());
  }

  std::string body_indent(const SyntaxNode& outer, const SyntaxNode& def) const {
    if (auto body = def.field("body")) {
      auto stmts = body->named_children();
      for (const auto& s : stmts) {
        if (s.is("comment")) continue;
        if (s.line() > def.line()) {
          auto p = indent_of(s);
          if (!p.empty()) return p;
        }
        break;
      }
    }
    return indent_of(outer) + "    ";
  }

  void visit_block(const SyntaxNode& container, std::uint32_t parent, EntityKind scope) {
    for (const auto& s : container.named_children()) visit_statement(s, parent, scope);
  }

  void visit_compound(const SyntaxNode& n, std::uint32_t parent, EntityKind scope) {
    for (const auto& c : n.named_children()) {
      if (c.is("block")) {
        visit_block(c, parent, scope);
      } else if (c.is("else_clause") || c.is("elif_clause") || c.is("except_clause") ||
                 c.is("except_group_clause") || c.is("finally_clause") || c.is("case_clause")) {
        visit_compound(c, parent, scope);
      }
    }
  }

  void visit_statement(const SyntaxNode& s, std::uint32_t parent, EntityKind scope) {
    if (s.is("decorated_definition")) {
      if (auto def = s.field("definition")) definition(s, *def, parent);
    } else if (s.is("class_definition") || s.is("function_definition")) {
      definition(s, s, parent);
    } else if (s.is("expression_statement")) {
      if (scope != EntityKind::Function) variable(s, parent);
    } else if (s.is("if_statement") || s.is("try_statement") || s.is("with_statement") || s.is("for_statement") ||
               s.is("while_statement")) {
      visit_compound(s, parent, scope);
    } else if (s.is("match_statement")) {
      walk(s, [&](const SyntaxNode& c) {
        if (c.is("case_clause")) {
          if (auto body = c.field("consequence")) visit_block(*body, parent, scope);
        }
      });
    } else if (s.is_error()) {
      for (const auto& c : s.named_children()) {
        if (is_statement(c)) visit_statement(c, parent, scope);
      }
    }
  }

  void definition(const SyntaxNode& outer, const SyntaxNode& def, std::uint32_t parent) {
    auto name = def.field("name");
    if (!name) return;
    CodeEntity e;
    e.kind = def.is("class_definition") ? EntityKind::Class : EntityKind::Function;
    e.name = std::string(name->text());
    e.file_path = file_.repo_relative_path;
    e.start_line = outer.line();
    e.end_line = outer.end_line();
    e.signature = header_through_colon(outer, def);
    e.body_indent = body_indent(outer, def);
    if (auto body = def.field("body")) {
      if (auto doc = docstring_node(*body)) {
        e.docstring = doc->line() > def.line() ? indented(*doc) : e.body_indent + std::string(doc->text());
      }
    }
    if (e.kind == EntityKind::Function) e.body = indent_of(outer) + std::string(outer.text());

    Interface iface;
    iface.nodes.push_back({e.name, name->line()});
    if (e.kind == EntityKind::Class) {
      iface.relations = {Relation::Inherits};
    } else {
      iface.relations = {Relation::Typeof, Relation::Assigns};
      if (auto params = def.field("parameters")) {
        for (const auto& p : params->named_children()) {
          std::optional<SyntaxNode> id;
          if (p.is("identifier")) {
            id = p;
          } else if (auto n = p.field("name")) {
            id = n;
          } else {
            for (const auto& c : p.named_children()) {
              if (c.is("identifier")) {
                id = c;
                break;
              }
            }
          }
          if (id && id->is("identifier")) iface.nodes.push_back({std::string(id->text()), id->line()});
        }
      }
    }
    const auto id = push(std::move(e), parent, std::move(iface));
    if (auto body = def.field("body")) {
      visit_block(*body, id, def.is("class_definition") ? EntityKind::Class : EntityKind::Function);
    }
  }

  static void collect_targets(const SyntaxNode& n, std::vector<SyntaxNode>& out) {
    if (n.is("identifier")) {
      out.push_back(n);
      return;
    }
    if (n.is("pattern_list") || n.is("tuple_pattern") || n.is("list_pattern") || n.is("tuple") || n.is("list") ||
        n.is("parenthesized_expression") || n.is("list_splat_pattern") || n.is("expression_list")) {
      for (const auto& c : n.named_children()) collect_targets(c, out);
    }
  }

  void variable(const SyntaxNode& stmt, std::uint32_t parent) {
    std::vector<SyntaxNode> targets;
    for (const auto& c : stmt.named_children()) {
      std::optional<SyntaxNode> a = c;
      while (a && (a->is("assignment") || a->is("augmented_assignment"))) {
        if (auto left = a->field("left")) collect_targets(*left, targets);
        auto right = a->field("right");
        a = right && right->is("assignment") ? right : std::nullopt;
      }
    }
    if (targets.empty()) return;
    CodeEntity e;
    e.kind = EntityKind::Variable;
    e.name = std::string(targets.front().text());
    for (std::size_t i = 1; i < targets.size(); ++i) {
      std::string alias(targets[i].text());
      if (alias != e.name && std::find(e.aliases.begin(), e.aliases.end(), alias) == e.aliases.end()) {
        e.aliases.push_back(alias);
      }
    }
    e.file_path = file_.repo_relative_path;
    e.start_line = stmt.line();
    e.end_line = stmt.end_line();
    e.body = indented(stmt);
    Interface iface;
    for (const auto& t : targets) iface.nodes.push_back({std::string(t.text()), t.line()});
    iface.relations = {Relation::Assigns, Relation::As, Relation::Typeof};
    push(std::move(e), parent, std::move(iface));
  }

  std::optional<std::uint32_t> local_child(std::uint32_t parent, const std::string& name) const {
    std::optional<std::uint32_t> best;
    for (auto c : children_[parent]) {
      const auto& e = out_.entities[c];
      bool match = e.name == name || std::find(e.aliases.begin(), e.aliases.end(), name) != e.aliases.end();
      if (match && (!best || e.start_line < out_.entities[*best].start_line)) best = c;
    }
    return best;
  }

  const ImportBinding* binding_for(const std::string& alias, std::uint32_t line) const {
    const ImportBinding* best = nullptr;
    for (const auto& b : out_.imports) {
      if (b.star() || b.alias != alias) continue;
      if (b.line <= line || !best) best = &b;
    }
    return best;
  }

  void resolve_head(std::uint32_t entity, const std::string& head) {
    auto segs = split_dots(head);
    std::vector<std::uint32_t> scopes;
    for (auto p = out_.parents[entity]; p; p = out_.parents[*p]) {
      if (out_.entities[*p].kind == EntityKind::Class) {
        scopes.push_back(*p);
        break;
      }
    }
    scopes.push_back(0);
    for (auto scope : scopes) {
      auto at = local_child(scope, segs[0]);
      if (!at) continue;
      for (std::size_t i = 1; i < segs.size(); ++i) {
        auto next = local_child(*at, segs[i]);
        if (!next) break;
        at = next;
      }
      if (*at != entity) out_.depends.emplace_back(entity, *at);
      return;
    }
    if (const auto* b = binding_for(segs[0], out_.entities[entity].start_line)) {
      if (auto t = import_target(*b, head)) out_.pending.push_back({entity, *t, false});
      return;
    }
    for (const auto& b : out_.imports) {
      if (b.star()) out_.pending.push_back({entity, ImportTarget{b.level, b.module, head}, true});
    }
  }

  void link_interface(std::uint32_t entity) {
    const auto& iface = interfaces_[entity];
    std::set<std::string> heads;
    for (std::size_t k = 0; k < iface.nodes.size(); ++k) {
      auto id = graph_.find(iface.nodes[k]);
      if (!id) continue;
      // The entity's own node takes only its defining relation; parameters
      // take their hints and defaults.
      for (auto e : graph_.in_edges(*id)) {
        const auto& edge = graph_.edges()[e];
        if (std::find(iface.relations.begin(), iface.relations.end(), edge.relation) == iface.relations.end()) continue;
        if (k == 0 && out_.entities[entity].kind == EntityKind::Function && edge.relation != Relation::Typeof) continue;
        heads.insert(graph_.node(edge.head).name);
      }
    }
    for (const auto& h : heads) resolve_head(entity, h);
  }

  const SourceFile& file_;
  const SyntaxTree& tree_;
  const std::string& text_;
  FileIndex out_;
  DataflowGraph graph_;
  std::vector<std::vector<std::uint32_t>> children_;
  std::vector<Interface> interfaces_;
  std::set<std::string> used_;
};

std::vector<std::string> package_dirs_without_init(const std::vector<FileIndex>& files) {
  std::set<std::string> dirs;
  std::set<std::string> inits;
  for (const auto& f : files) {
    std::string d = f.path;
    if (d.ends_with("/__init__.py")) inits.insert(d.substr(0, d.size() - 12));
    for (auto slash = d.rfind('/'); slash != std::string::npos; slash = d.rfind('/')) {
      d.resize(slash);
      dirs.insert(d);
    }
  }
  std::vector<std::string> out;
  for (const auto& d : dirs) {
    if (!inits.contains(d)) out.push_back(d);
  }
  return out;
}

}  // namespace

FileIndex index_file(const SourceFile& file) {
  auto tree = parse(file);
  return FileIndexer(file, tree).run();
}

ContextGraph link_imports(std::vector<FileIndex> files) {
  std::sort(files.begin(), files.end(), [](const FileIndex& a, const FileIndex& b) { return a.path < b.path; });
  ContextGraph g;
  for (const auto& dir : package_dirs_without_init(files)) {
    CodeEntity m;
    m.kind = EntityKind::Module;
    m.name = dir.substr(dir.rfind('/') == std::string::npos ? 0 : dir.rfind('/') + 1);
    m.qualified_path = dir + "/";
    m.file_path = dir;
    m.synthetic = true;
    g.add_entity(std::move(m), std::nullopt);
  }
  std::vector<EntityId> offsets;
  for (auto& f : files) {
    const auto base = static_cast<EntityId>(g.size());
    offsets.push_back(base);
    for (std::size_t i = 0; i < f.entities.size(); ++i) {
      std::optional<EntityId> parent;
      if (f.parents[i]) parent = base + *f.parents[i];
      g.add_entity(std::move(f.entities[i]), parent);
    }
    for (auto [a, b] : f.depends) g.add_depends(base + a, base + b);
    for (auto& d : f.diagnostics) g.add_diagnostic(std::move(d));
  }
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    const auto& f = files[fi];
    const EntityId base = offsets[fi];
    for (const auto& p : f.pending) {
      auto r = g.resolve(f.path, p.target.level, p.target.module, p.target.name);
      if (!r) continue;
      if (p.star_lookup && (!r->exact || g.entity(r->entity).kind == EntityKind::Module)) continue;
      g.add_depends(base + p.from, r->entity);
    }
    for (const auto& b : f.imports) {
      const std::string name = b.from_import && !b.star() ? b.name : std::string();
      auto r = g.resolve(f.path, b.level, b.module, name);
      std::string shown = std::string(b.level, '.') + b.module;
      if (!r) {
        auto head = b.module.substr(0, b.module.find('.'));
        if (b.level > 0 || g.has_top_level(head)) {
          g.add_diagnostic({Diagnostic::Severity::Warning, "dangling-import", f.path, b.line,
                            "cannot resolve module '" + shown + "'"});
        }
      } else if (!r->exact) {
        g.add_diagnostic({Diagnostic::Severity::Warning, "dangling-import", f.path, b.line,
                          "'" + name + "' not found in '" + shown + "'"});
      }
    }
  }
  g.finalize();
  return g;
}

std::vector<std::string> discover_sources(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied), end;
  for (; it != end; ++it) {
    const auto& p = it->path();
    const auto fname = p.filename().string();
    if (it->is_directory()) {
      if ((fname.starts_with(".") && fname.size() > 1) || fname == "__pycache__") it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file() || p.extension() != ".py") continue;
    out.push_back(fs::relative(p, root).generic_string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

FileIndex index_one(const std::filesystem::path& root, const std::string& rel) {
  try {
    return index_file(read_source_file(root, rel));
  } catch (const std::exception& e) {
    FileIndex f;
    f.path = rel;
    CodeEntity m;
    m.kind = EntityKind::Module;
    m.name = module_name(rel);
    m.qualified_path = rel;
    m.file_path = rel;
    f.entities.push_back(std::move(m));
    f.parents.emplace_back();
    f.diagnostics.push_back({Diagnostic::Severity::Warning, "unreadable-file", rel, 0, e.what()});
    return f;
  }
}

void check_root(const std::filesystem::path& root) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw std::runtime_error("not a directory: " + root.string());
  }
}

}  // namespace

ContextGraph index_repository(const std::filesystem::path& root, const IndexOptions& options) {
  check_root(root);
  const auto paths = discover_sources(root);
  std::vector<FileIndex> files(paths.size());
  const int jobs = options.jobs > 0 ? options.jobs : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(paths.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) files[i] = index_one(root, paths[i]);
  auto g = link_imports(std::move(files));
  g.set_root(std::filesystem::absolute(root).lexically_normal().string());
  return g;
}

ContextGraph index_repository_serial(const std::filesystem::path& root) {
  check_root(root);
  std::vector<FileIndex> files;
  for (const auto& p : discover_sources(root)) files.push_back(index_one(root, p));
  auto g = link_imports(std::move(files));
  g.set_root(std::filesystem::absolute(root).lexically_normal().string());
  return g;
}

}  // namespace repoctx
