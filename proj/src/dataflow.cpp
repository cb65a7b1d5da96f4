#include "repoctx/dataflow.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "repoctx/imports.hpp"

namespace repoctx {

std::string_view relation_name(Relation r) noexcept {
  switch (r) {
    case Relation::Assigns:
      return "Assigns";
    case Relation::As:
      return "As";
    case Relation::Refers:
      return "Refers";
    case Relation::Typeof:
      return "Typeof";
    case Relation::Inherits:
      return "Inherits";
  }
  return "?";
}

std::optional<Relation> parse_relation(std::string_view name) noexcept {
  for (auto r : kAllRelations) {
    if (relation_name(r) == name) return r;
  }
  return std::nullopt;
}

DataflowGraph::DataflowGraph(std::vector<DfgNode> nodes, std::vector<DfgEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (NodeId i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i], i);

  const std::size_t n = nodes_.size();
  auto build = [&](auto key, std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& list) {
    offsets.assign(n + 1, 0);
    for (const auto& e : edges_) ++offsets[key(e) + 1];
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    list.assign(edges_.size(), 0);
    std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t i = 0; i < edges_.size(); ++i) list[fill[key(edges_[i])]++] = i;
  };
  build([](const DfgEdge& e) { return e.head; }, out_offsets_, out_list_);
  build([](const DfgEdge& e) { return e.tail; }, in_offsets_, in_list_);
}

std::optional<NodeId> DataflowGraph::find(const DfgNode& n) const {
  auto it = index_.find(n);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> DataflowGraph::nodes_on_line(std::uint32_t line) const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].line == line) out.push_back(i);
  }
  return out;
}

std::span<const std::uint32_t> DataflowGraph::out_edges(NodeId id) const {
  if (id >= nodes_.size()) return {};
  return std::span<const std::uint32_t>(out_list_).subspan(out_offsets_[id], out_offsets_[id + 1] - out_offsets_[id]);
}

std::span<const std::uint32_t> DataflowGraph::in_edges(NodeId id) const {
  if (id >= nodes_.size()) return {};
  return std::span<const std::uint32_t>(in_list_).subspan(in_offsets_[id], in_offsets_[id + 1] - in_offsets_[id]);
}

std::set<DfgTriplet> DataflowGraph::triplets() const {
  std::set<DfgTriplet> out;
  for (const auto& e : edges_) out.insert({nodes_[e.head], e.relation, nodes_[e.tail]});
  return out;
}

namespace {

constexpr int kMaxDepth = 400;

using Nodes = std::vector<NodeId>;

bool is_list_like(const SyntaxNode& n) {
  return n.is("pattern_list") || n.is("tuple_pattern") || n.is("list_pattern") || n.is("tuple") ||
         n.is("list") || n.is("expression_list");
}

bool is_open(const SyntaxNode& n) { return n.is("(") || n.is("[") || n.is("{"); }
bool is_close(const SyntaxNode& n) { return n.is(")") || n.is("]") || n.is("}"); }

bool is_augmented_op(const SyntaxNode& n) {
  auto t = n.type();
  return !n.is_named() && t.size() >= 2 && t.back() == '=' && t != "==" && t != "!=" && t != "<=" && t != ">=";
}

void append(Nodes& into, const Nodes& from) { into.insert(into.end(), from.begin(), from.end()); }

class Builder {
 public:
  DataflowGraph finish() {
    std::vector<DfgEdge> edges(edges_.begin(), edges_.end());
    return DataflowGraph(std::move(nodes_), std::move(edges));
  }

  void statements(const SyntaxNode& container) {
    for (const auto& child : container.named_children()) statement(child);
  }

  void statement(const SyntaxNode& n) {
    if (depth_ > kMaxDepth) return;
    ++depth_;
    dispatch_statement(n);
    --depth_;
  }

 private:
  // ---- node bookkeeping -------------------------------------------------

  NodeId node_at(const std::string& name, std::uint32_t line) {
    auto key = std::make_pair(name, line);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back({name, line});
    index_.emplace(std::move(key), id);
    return id;
  }

  void edge(NodeId head, Relation r, NodeId tail) {
    // Creation order is the topological witness; an edge against it would
    // close a cycle (same-line rebinding) and is dropped.
    if (head < tail) edges_.insert({head, r, tail});
  }

  std::optional<NodeId> latest(const std::string& name) const {
    auto it = latest_.find(name);
    if (it == latest_.end()) return std::nullopt;
    return it->second;
  }

  // Value source: the most recent prior occurrence, else a fresh node.
  NodeId ref(const std::string& name, std::uint32_t line) {
    if (auto prior = latest(name)) return *prior;
    NodeId id = node_at(name, line);
    latest_[name] = id;
    return id;
  }

  // Standalone read: an occurrence on this line referring to the prior one.
  NodeId use(const std::string& name, std::uint32_t line) {
    auto prior = latest(name);
    NodeId id = node_at(name, line);
    if (prior && *prior != id) edge(*prior, Relation::Refers, id);
    latest_[name] = id;
    return id;
  }

  NodeId define(const std::string& name, std::uint32_t line) {
    NodeId id = node_at(name, line);
    latest_[name] = id;
    return id;
  }

  // Attribute chain "a.b.c": the base resolves to its prior occurrence and
  // each longer prefix becomes an occurrence on this line linked by Refers.
  NodeId chain(const std::string& dotted, std::uint32_t line, bool rebind) {
    std::size_t dot = dotted.find('.');
    if (dot == std::string::npos) return rebind ? define(dotted, line) : ref(dotted, line);
    NodeId prev = ref(dotted.substr(0, dot), line);
    while (true) {
      std::size_t next = dotted.find('.', dot + 1);
      const bool last = next == std::string::npos;
      std::string prefix = dotted.substr(0, last ? dotted.size() : next);
      auto prior = latest(prefix);
      NodeId id = node_at(prefix, line);
      edge(prev, Relation::Refers, id);
      if (prior && *prior != id && !(last && rebind)) edge(*prior, Relation::Refers, id);
      latest_[prefix] = id;
      prev = id;
      if (last) break;
      dot = next;
    }
    return prev;
  }

  void link(const Nodes& heads, Relation r, const Nodes& tails) {
    for (NodeId h : heads) {
      for (NodeId t : tails) edge(h, r, t);
    }
  }

  // ---- expressions ------------------------------------------------------

  // Nodes a value's type derives from. Arguments, indices and conditions are
  // visited as plain reads.
  Nodes sources(const SyntaxNode& n) {
    if (depth_ > kMaxDepth) return {};
    ++depth_;
    Nodes out = sources_impl(n);
    --depth_;
    return out;
  }

  Nodes sources_impl(const SyntaxNode& n) {
    const std::uint32_t line = n.line();
    if (n.is("identifier")) return {ref(std::string(n.text()), line)};
    if (n.is("attribute")) {
      if (auto d = dotted_name(n)) return {chain(*d, line, false)};
      if (auto object = n.field("object")) return sources(*object);
      return {};
    }
    if (n.is("call")) {
      Nodes out;
      if (auto fn = n.field("function")) out = sources(*fn);
      if (auto args = n.field("arguments")) reads(*args);
      return out;
    }
    if (n.is("subscript")) {
      Nodes out;
      if (auto value = n.field("value")) out = sources(*value);
      for (const auto& s : n.fields("subscript")) reads(s);
      return out;
    }
    if (n.is("binary_operator") || n.is("boolean_operator")) {
      Nodes out;
      if (auto l = n.field("left")) append(out, sources(*l));
      if (auto r = n.field("right")) append(out, sources(*r));
      return out;
    }
    if (n.is("unary_operator")) {
      if (auto arg = n.field("argument")) return sources(*arg);
      return {};
    }
    if (n.is("conditional_expression")) {
      auto parts = n.named_children();
      Nodes out;
      if (!parts.empty()) append(out, sources(parts[0]));
      if (parts.size() > 1) reads(parts[1]);
      if (parts.size() > 2) append(out, sources(parts[2]));
      return out;
    }
    if (n.is("parenthesized_expression") || n.is("await") || n.is("type")) {
      Nodes out;
      for (const auto& c : n.named_children()) {
        if (!c.is("comment")) append(out, sources(c));
      }
      return out;
    }
    if (n.is("named_expression")) return walrus(n);
    if (n.is("assignment")) return assignment(n);
    if (n.is("lambda")) {
      lambda(n);
      return {};
    }
    reads(n);
    return {};
  }

  // Every name mentioned in a type annotation, including simple forward
  // references written as strings.
  Nodes type_sources(const SyntaxNode& n) {
    if (depth_ > kMaxDepth) return {};
    ++depth_;
    Nodes out;
    if (n.is("identifier")) {
      out.push_back(ref(std::string(n.text()), n.line()));
    } else if (auto d = n.is("attribute") ? dotted_name(n) : std::nullopt) {
      out.push_back(chain(*d, n.line(), false));
    } else if (n.is("string")) {
      append(out, string_annotation(n));
    } else {
      for (const auto& c : n.named_children()) append(out, type_sources(c));
    }
    --depth_;
    return out;
  }

  Nodes string_annotation(const SyntaxNode& n) {
    Nodes out;
    for (const auto& c : n.named_children()) {
      if (!c.is("string_content")) continue;
      std::string_view s = c.text();
      std::size_t i = 0;
      while (i < s.size()) {
        auto ident_start = [](char ch) { return std::isalpha(static_cast<unsigned char>(ch)) || ch == '_'; };
        if (!ident_start(s[i])) {
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' ||
                                (s[j] == '.' && j + 1 < s.size() && ident_start(s[j + 1])))) {
          ++j;
        }
        std::string name(s.substr(i, j - i));
        out.push_back(name.find('.') == std::string::npos ? ref(name, c.line()) : chain(name, c.line(), false));
        i = j;
      }
    }
    return out;
  }

  // Visits an expression for its reads only.
  void reads(const SyntaxNode& n) {
    if (depth_ > kMaxDepth) return;
    ++depth_;
    reads_impl(n);
    --depth_;
  }

  void reads_impl(const SyntaxNode& n) {
    if (!n.is_named()) return;
    const std::uint32_t line = n.line();
    if (n.is("identifier")) {
      use(std::string(n.text()), line);
      return;
    }
    if (n.is("attribute")) {
      if (auto d = dotted_name(n)) {
        use_chain(*d, line);
      } else if (auto object = n.field("object")) {
        reads(*object);
      }
      return;
    }
    if (n.is("keyword_argument")) {
      if (auto v = n.field("value")) reads(*v);
      return;
    }
    if (n.is("string") || n.is("concatenated_string")) {
      walk_interpolations(n);
      return;
    }
    if (n.is("comment") || n.is("integer") || n.is("float") || n.is("true") || n.is("false") || n.is("none") ||
        n.is("ellipsis") || n.is("escape_sequence")) {
      return;
    }
    if (n.is("lambda")) {
      lambda(n);
      return;
    }
    if (n.is("named_expression")) {
      walrus(n);
      return;
    }
    if (n.is("list_comprehension") || n.is("set_comprehension") || n.is("dictionary_comprehension") ||
        n.is("generator_expression")) {
      comprehension(n);
      return;
    }
    if (n.is_error()) {
      error_region(n);
      return;
    }
    if (is_statement(n)) {
      statement(n);
      return;
    }
    for (const auto& c : n.named_children()) reads(c);
  }

  void use_chain(const std::string& dotted, std::uint32_t line) {
    if (dotted.find('.') == std::string::npos) {
      use(dotted, line);
    } else {
      chain(dotted, line, false);
    }
  }

  void walk_interpolations(const SyntaxNode& n) {
    for (const auto& c : n.named_children()) {
      if (c.is("interpolation")) {
        if (auto e = c.field("expression")) reads(*e);
      } else if (c.is("string")) {
        walk_interpolations(c);
      }
    }
  }

  // ---- binding forms ----------------------------------------------------

  Nodes targets(const SyntaxNode& n) {
    if (depth_ > kMaxDepth) return {};
    ++depth_;
    Nodes out = targets_impl(n);
    --depth_;
    return out;
  }

  Nodes targets_impl(const SyntaxNode& n) {
    const std::uint32_t line = n.line();
    if (n.is("identifier")) return {define(std::string(n.text()), line)};
    if (n.is("attribute")) {
      if (auto d = dotted_name(n)) return {chain(*d, line, true)};
      if (auto object = n.field("object")) reads(*object);
      return {};
    }
    if (n.is("subscript")) {
      Nodes out;
      if (auto value = n.field("value")) {
        if (auto d = dotted_name(*value)) {
          out.push_back(d->find('.') == std::string::npos ? use(*d, value->line()) : chain(*d, value->line(), false));
        } else {
          reads(*value);
        }
      }
      for (const auto& s : n.fields("subscript")) reads(s);
      return out;
    }
    if (is_list_like(n) || n.is("list_splat_pattern") || n.is("list_splat") || n.is("dictionary_splat_pattern") ||
        n.is("parenthesized_expression") || n.is("as_pattern_target") || n.is("type")) {
      Nodes out;
      for (const auto& c : n.named_children()) append(out, targets(c));
      return out;
    }
    reads(n);
    return {};
  }

  static std::vector<SyntaxNode> elements(const SyntaxNode& list) {
    std::vector<SyntaxNode> out;
    for (const auto& c : list.named_children()) {
      if (!c.is("comment")) out.push_back(c);
    }
    return out;
  }

  static bool has_splat(const std::vector<SyntaxNode>& items) {
    return std::any_of(items.begin(), items.end(), [](const SyntaxNode& c) {
      return c.is("list_splat") || c.is("list_splat_pattern") || c.is("dictionary_splat");
    });
  }

  Nodes assignment(const SyntaxNode& n) {
    auto left = n.field("left");
    auto right = n.field("right");
    auto type = n.field("type");
    if (!left) {
      if (right) reads(*right);
      return {};
    }
    if (right && is_list_like(*left) && is_list_like(*right) && !right->is("list")) {
      auto lhs = elements(*left);
      auto rhs = elements(*right);
      if (lhs.size() == rhs.size() && !has_splat(lhs) && !has_splat(rhs)) {
        std::vector<Nodes> srcs;
        for (const auto& r : rhs) srcs.push_back(sources(r));
        Nodes all;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
          Nodes t = targets(lhs[i]);
          link(srcs[i], Relation::Assigns, t);
          append(all, t);
        }
        return all;
      }
    }
    Nodes srcs = right ? sources(*right) : Nodes{};
    Nodes types = type ? type_sources(*type) : Nodes{};
    Nodes tgts = targets(*left);
    link(srcs, Relation::Assigns, tgts);
    link(types, Relation::Typeof, tgts);
    return tgts;
  }

  void augmented(const SyntaxNode& n) {
    auto left = n.field("left");
    auto right = n.field("right");
    if (!left) return;
    Nodes srcs = right ? sources(*right) : Nodes{};
    Nodes prior = sources(*left);
    Nodes tgts = targets(*left);
    link(prior, Relation::Assigns, tgts);
    link(srcs, Relation::Assigns, tgts);
  }

  Nodes walrus(const SyntaxNode& n) {
    auto name = n.field("name");
    auto value = n.field("value");
    Nodes srcs = value ? sources(*value) : Nodes{};
    if (!name) return {};
    Nodes tgts = targets(*name);
    link(srcs, Relation::Assigns, tgts);
    return tgts;
  }

  void lambda(const SyntaxNode& n) {
    if (auto params = n.field("parameters")) parameters(*params);
    if (auto body = n.field("body")) reads(*body);
  }

  void comprehension(const SyntaxNode& n) {
    std::vector<SyntaxNode> rest;
    for (const auto& c : n.named_children()) {
      if (c.is("for_in_clause")) {
        for_in(c);
      } else {
        rest.push_back(c);
      }
    }
    for (const auto& c : rest) reads(c);
  }

  void for_in(const SyntaxNode& clause) {
    Nodes srcs;
    for (const auto& r : clause.fields("right")) append(srcs, sources(r));
    Nodes tgts;
    if (auto left = clause.field("left")) tgts = targets(*left);
    link(srcs, Relation::Assigns, tgts);
  }

  // `expr as target` inside with-items and except clauses.
  void as_binding(const SyntaxNode& as_pattern) {
    auto parts = as_pattern.named_children();
    Nodes srcs;
    Nodes tgts;
    for (const auto& p : parts) {
      if (p.is("as_pattern_target")) {
        append(tgts, targets(p));
      } else if (tgts.empty()) {
        append(srcs, sources(p));
      }
    }
    link(srcs, Relation::As, tgts);
  }

  void parameters(const SyntaxNode& params) {
    for (const auto& p : params.named_children()) parameter(p);
  }

  void parameter(const SyntaxNode& p) {
    if (p.is("identifier")) {
      define(std::string(p.text()), p.line());
      return;
    }
    if (p.is("list_splat_pattern") || p.is("dictionary_splat_pattern") || p.is("tuple_pattern")) {
      targets(p);
      return;
    }
    if (p.is("typed_parameter") || p.is("default_parameter") || p.is("typed_default_parameter")) {
      Nodes types;
      Nodes values;
      if (auto t = p.field("type")) types = type_sources(*t);
      if (auto v = p.field("value")) values = sources(*v);
      Nodes tgts;
      if (auto name = p.field("name")) {
        tgts = targets(*name);
      } else {
        for (const auto& c : p.named_children()) {
          if (c.is("identifier") || c.is("list_splat_pattern") || c.is("dictionary_splat_pattern")) {
            tgts = targets(c);
            break;
          }
        }
      }
      link(types, Relation::Typeof, tgts);
      link(values, Relation::Assigns, tgts);
    }
  }

  void function(const SyntaxNode& n) {
    auto name = n.field("name");
    Nodes ret;
    if (auto rt = n.field("return_type")) ret = type_sources(*rt);
    std::optional<NodeId> fn;
    if (name) fn = define(std::string(name->text()), name->line());
    if (fn) link(ret, Relation::Typeof, {*fn});
    if (auto params = n.field("parameters")) parameters(*params);
    for (const auto& c : n.children()) {
      if (c.is_error()) error_region(c);
    }
    if (auto body = n.field("body")) statements(*body);
  }

  void klass(const SyntaxNode& n) {
    Nodes bases;
    if (auto sup = n.field("superclasses")) {
      for (const auto& arg : sup->named_children()) {
        if (arg.is("keyword_argument")) {
          if (auto v = arg.field("value")) reads(*v);
        } else if (arg.is("list_splat") || arg.is("dictionary_splat")) {
          reads(arg);
        } else {
          append(bases, sources(arg));
        }
      }
    }
    if (auto name = n.field("name")) {
      NodeId cls = define(std::string(name->text()), name->line());
      link(bases, Relation::Inherits, {cls});
    }
    for (const auto& c : n.children()) {
      if (c.is_error()) error_region(c);
    }
    if (auto body = n.field("body")) statements(*body);
  }

  void import(const SyntaxNode& n) {
    for (const auto& b : bindings_of(n)) {
      if (!b.star()) define(b.alias, b.line);
    }
  }

  void blocks_of(const SyntaxNode& n) {
    for (const auto& c : n.named_children()) {
      if (c.is("block")) {
        statements(c);
      } else if (c.is("else_clause") || c.is("finally_clause") || c.is("elif_clause")) {
        if (auto cond = c.field("condition")) reads(*cond);
        blocks_of(c);
      } else if (c.is_error()) {
        error_region(c);
      }
    }
  }

  void dispatch_statement(const SyntaxNode& n) {
    const auto t = n.type();
    if (t == "expression_statement") {
      for (const auto& c : n.named_children()) {
        if (c.is("assignment")) {
          assignment(c);
        } else if (c.is("augmented_assignment")) {
          augmented(c);
        } else {
          reads(c);
        }
      }
    } else if (t == "import_statement" || t == "import_from_statement") {
      import(n);
    } else if (t == "function_definition") {
      function(n);
    } else if (t == "class_definition") {
      klass(n);
    } else if (t == "decorated_definition") {
      for (const auto& c : n.named_children()) {
        if (c.is("decorator")) reads(c);
      }
      if (auto def = n.field("definition")) statement(*def);
    } else if (t == "for_statement") {
      for_in(n);
      blocks_of(n);
    } else if (t == "while_statement" || t == "if_statement") {
      if (auto cond = n.field("condition")) reads(*cond);
      blocks_of(n);
    } else if (t == "try_statement") {
      for (const auto& c : n.named_children()) {
        if (c.is("except_clause") || c.is("except_group_clause")) {
          except_clause(c);
        } else if (c.is("block")) {
          statements(c);
        } else {
          blocks_of(c);
        }
      }
    } else if (t == "with_statement") {
      for (const auto& c : n.named_children()) {
        if (c.is("with_clause")) {
          for (const auto& item : c.named_children()) with_item(item);
        } else if (c.is("block")) {
          statements(c);
        }
      }
    } else if (t == "match_statement") {
      // Patterns carry no type-sensitive relation; case bodies are ordinary code.
      walk(n, [&](const SyntaxNode& c) {
        if (c.is("case_clause")) {
          if (auto body = c.field("consequence")) statements(*body);
        }
      });
    } else if (t == "block" || t == "module") {
      statements(n);
    } else if (t == "global_statement" || t == "nonlocal_statement" || t == "pass_statement" ||
               t == "break_statement" || t == "continue_statement" || t == "future_import_statement" ||
               t == "comment" || t == "type_alias_statement") {
      // nothing
    } else if (n.is_error()) {
      error_region(n);
    } else {
      for (const auto& c : n.named_children()) reads(c);
    }
  }

  void with_item(const SyntaxNode& item) {
    if (item.is("with_item")) {
      if (auto v = item.field("value")) {
        if (v->is("as_pattern")) {
          as_binding(*v);
        } else {
          reads(*v);
        }
      }
    } else {
      reads(item);
    }
  }

  void except_clause(const SyntaxNode& c) {
    for (const auto& part : c.named_children()) {
      if (part.is("as_pattern")) {
        as_binding(part);
      } else if (part.is("block")) {
        statements(part);
      } else {
        reads(part);
      }
    }
  }

  // ---- salvage of unparsable regions -------------------------------------

  // Value nodes of a flat token fragment. Identifier/'.' runs are rejoined
  // into chains; everything inside brackets is an argument and only read.
  Nodes fragment(std::span<const SyntaxNode> seg, bool as_sources) {
    Nodes out;
    int depth = 0;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const auto& n = seg[i];
      if (is_open(n)) {
        ++depth;
        continue;
      }
      if (is_close(n)) {
        depth = std::max(0, depth - 1);
        continue;
      }
      if (!n.is_named()) continue;
      if (depth > 0 || !as_sources) {
        if (n.is("identifier") || n.is("attribute")) {
          std::size_t j = i;
          std::string dotted = join_chain(seg, j);
          if (!dotted.empty()) {
            use_chain(dotted, n.line());
            i = j - 1;
            continue;
          }
        }
        reads(n);
        continue;
      }
      if (n.is("identifier") || n.is("attribute")) {
        std::size_t j = i;
        std::string dotted = join_chain(seg, j);
        if (!dotted.empty()) {
          out.push_back(chain(dotted, n.line(), false));
          i = j - 1;
          continue;
        }
      }
      append(out, sources(n));
    }
    return out;
  }

  static std::string join_chain(std::span<const SyntaxNode> seg, std::size_t& i) {
    std::string out;
    bool expect_name = true;
    while (i < seg.size()) {
      const auto& n = seg[i];
      if (expect_name && (n.is("identifier") || n.is("attribute"))) {
        auto d = dotted_name(n);
        if (!d) break;
        out += *d;
        expect_name = false;
      } else if (!expect_name && n.is(".")) {
        expect_name = true;
        if (i + 1 >= seg.size() || !(seg[i + 1].is("identifier"))) {
          ++i;  // trailing '.', the attribute being typed
          break;
        }
        out += '.';
      } else {
        break;
      }
      ++i;
    }
    return out;
  }

  Nodes fragment_targets(std::span<const SyntaxNode> seg) {
    Nodes out;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const auto& n = seg[i];
      if (!n.is_named()) continue;
      if (n.is("identifier") || n.is("attribute")) {
        std::size_t j = i;
        std::string dotted = join_chain(seg, j);
        if (!dotted.empty()) {
          out.push_back(chain(dotted, n.line(), true));
          i = j - 1;
          continue;
        }
      }
      append(out, targets(n));
    }
    return out;
  }

  static std::optional<std::size_t> find_token(std::span<const SyntaxNode> seg, std::string_view tok,
                                               std::size_t from = 0) {
    int depth = 0;
    for (std::size_t i = from; i < seg.size(); ++i) {
      if (is_open(seg[i])) ++depth;
      if (is_close(seg[i])) depth = std::max(0, depth - 1);
      if (depth == 0 && seg[i].is(tok)) return i;
    }
    return std::nullopt;
  }

  void error_region(const SyntaxNode& error) {
    if (depth_ > kMaxDepth) return;
    ++depth_;
    for (const auto& seg : error_segments(error)) salvage(seg);
    --depth_;
  }

  void salvage(std::span<const SyntaxNode> seg) {
    if (seg.empty()) return;
    if (seg.size() == 1 && seg[0].is_named() && !seg[0].is_error()) {
      if (is_statement(seg[0])) {
        statement(seg[0]);
      } else {
        reads(seg[0]);
      }
      return;
    }
    if (seg[0].is("async")) seg = seg.subspan(1);
    if (seg.empty()) return;
    const auto& head = seg[0];
    if (head.is("from") || head.is("import")) {
      for (const auto& b : salvage_import(seg)) {
        if (!b.star()) define(b.alias, b.line);
      }
      return;
    }
    if (head.is("def")) {
      Nodes ret;
      if (auto arrow = find_token(seg, "->")) {
        auto colon = find_token(seg, ":", *arrow);
        auto end = colon ? *colon : seg.size();
        for (std::size_t i = *arrow + 1; i < end; ++i) {
          if (seg[i].is_named()) append(ret, type_sources(seg[i]));
        }
      }
      if (seg.size() > 1 && seg[1].is("identifier")) {
        NodeId fn = define(std::string(seg[1].text()), seg[1].line());
        link(ret, Relation::Typeof, {fn});
      }
      for (const auto& n : seg) {
        if (n.is("parameters")) parameters(n);
        if (n.is("block")) statements(n);
      }
      return;
    }
    if (head.is("class")) {
      Nodes bases;
      for (const auto& n : seg) {
        if (!n.is("argument_list")) continue;
        for (const auto& arg : n.named_children()) {
          if (arg.is("keyword_argument")) {
            reads(arg);
          } else {
            append(bases, sources(arg));
          }
        }
      }
      if (seg.size() > 1 && seg[1].is("identifier")) {
        NodeId cls = define(std::string(seg[1].text()), seg[1].line());
        link(bases, Relation::Inherits, {cls});
      }
      for (const auto& n : seg) {
        if (n.is("block")) statements(n);
      }
      return;
    }
    if (head.is("with") || head.is("except") || head.is("except*")) {
      const Relation r = Relation::As;
      std::size_t item_start = 1;
      while (item_start < seg.size()) {
        auto comma = find_token(seg, ",", item_start);
        std::size_t item_end = comma ? *comma : seg.size();
        auto item = seg.subspan(item_start, item_end - item_start);
        if (auto as = find_token(item, "as")) {
          Nodes srcs = fragment(item.subspan(0, *as), true);
          auto rest = item.subspan(*as + 1);
          auto colon = find_token(rest, ":");
          Nodes tgts = fragment_targets(rest.subspan(0, colon ? *colon : rest.size()));
          link(srcs, r, tgts);
        } else {
          for (const auto& n : item) {
            if (n.is_named()) {
              if (n.is("as_pattern")) {
                as_binding(n);
              } else {
                reads(n);
              }
            }
          }
        }
        item_start = item_end + 1;
      }
      return;
    }
    if (head.is("for")) {
      auto in = find_token(seg, "in");
      if (in) {
        Nodes srcs = fragment(seg.subspan(*in + 1), true);
        Nodes tgts = fragment_targets(seg.subspan(1, *in - 1));
        link(srcs, Relation::Assigns, tgts);
      } else {
        fragment_targets(seg.subspan(1));
      }
      return;
    }
    std::optional<std::size_t> eq = find_token(seg, "=");
    std::optional<std::size_t> aug;
    for (std::size_t i = 0; i < seg.size() && !eq; ++i) {
      if (is_augmented_op(seg[i])) {
        aug = i;
        break;
      }
    }
    if (eq || aug) {
      const std::size_t op = eq ? *eq : *aug;
      auto lhs = seg.subspan(0, op);
      Nodes types;
      if (auto colon = find_token(lhs, ":")) {
        for (const auto& t : lhs.subspan(*colon + 1)) {
          if (t.is_named()) append(types, type_sources(t));
        }
        lhs = lhs.subspan(0, *colon);
      }
      Nodes srcs = fragment(seg.subspan(op + 1), true);
      Nodes prior = aug ? fragment(lhs, true) : Nodes{};
      Nodes tgts = fragment_targets(lhs);
      link(srcs, Relation::Assigns, tgts);
      link(prior, Relation::Assigns, tgts);
      link(types, Relation::Typeof, tgts);
      return;
    }
    fragment(seg, false);
  }

  std::vector<DfgNode> nodes_;
  std::map<std::pair<std::string, std::uint32_t>, NodeId> index_;
  std::unordered_map<std::string, NodeId> latest_;
  std::set<DfgEdge> edges_;
  int depth_ = 0;
};

}  // namespace

DataflowGraph build_dfg(const SyntaxTree& tree, const SourceFile& /*file*/) {
  Builder b;
  b.statement(tree.root());
  return b.finish();
}

std::set<std::string> expand_refers(const DataflowGraph& graph, std::string_view name) {
  std::set<std::string> out{std::string(name)};
  std::vector<bool> seen(graph.size(), false);
  std::deque<NodeId> queue;
  const std::string prefix = std::string(name) + ".";
  for (NodeId i = 0; i < graph.size(); ++i) {
    const auto& n = graph.node(i).name;
    if (n == name || n.starts_with(prefix)) {
      seen[i] = true;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    NodeId id = queue.front();
    queue.pop_front();
    out.insert(graph.node(id).name);
    for (auto e : graph.out_edges(id)) {
      const auto& edge = graph.edges()[e];
      if (edge.relation != Relation::Refers || seen[edge.tail]) continue;
      seen[edge.tail] = true;
      queue.push_back(edge.tail);
    }
  }
  return out;
}

std::set<DfgNode> last_line_dependencies(const DataflowGraph& graph, std::uint32_t cursor_line) {
  std::set<DfgNode> out;
  std::vector<bool> seen(graph.size(), false);
  std::vector<NodeId> stack = graph.nodes_on_line(cursor_line);
  for (NodeId id : stack) seen[id] = true;
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    out.insert(graph.node(id));
    for (auto e : graph.in_edges(id)) {
      NodeId h = graph.edges()[e].head;
      if (!seen[h]) {
        seen[h] = true;
        stack.push_back(h);
      }
    }
  }
  return out;
}

std::map<std::string, std::vector<NodeId>> propagate_names(const DataflowGraph& graph, NodeId root,
                                                           std::string_view root_name) {
  constexpr std::size_t kMaxNamesPerNode = 32;
  std::map<std::string, std::vector<NodeId>> out;
  if (root >= graph.size()) return out;
  std::vector<std::set<std::string>> names(graph.size());
  names[root].insert(std::string(root_name));
  // Ids are a topological order, so one ascending sweep settles every node.
  for (NodeId id = root; id < graph.size(); ++id) {
    if (names[id].empty()) continue;
    const std::string& head_name = graph.node(id).name;
    for (auto e : graph.out_edges(id)) {
      const auto& edge = graph.edges()[e];
      auto& into = names[edge.tail];
      std::string suffix;
      if (edge.relation == Relation::Refers) {
        const std::string& tail_name = graph.node(edge.tail).name;
        if (tail_name.size() > head_name.size() && tail_name.starts_with(head_name) &&
            tail_name[head_name.size()] == '.') {
          suffix = tail_name.substr(head_name.size());
        }
      }
      for (const auto& n : names[id]) {
        if (into.size() >= kMaxNamesPerNode) break;
        into.insert(n + suffix);
      }
    }
  }
  for (NodeId id = root; id < graph.size(); ++id) {
    for (const auto& n : names[id]) out[n].push_back(id);
  }
  return out;
}

std::string dump_triplets(const DataflowGraph& graph) {
  std::ostringstream out;
  for (const auto& t : graph.triplets()) {
    out << t.head.name << " -" << relation_name(t.relation) << "-> " << t.tail.name << " @" << t.head.line << ','
        << t.tail.line << '\n';
  }
  return out.str();
}

}  // namespace repoctx
