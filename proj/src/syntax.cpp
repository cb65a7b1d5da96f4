#include "repoctx/syntax.hpp"

#include "repoctx/error.hpp"

extern "C" const TSLanguage* tree_sitter_python(void);

namespace repoctx {

namespace {

struct ParserDeleter {
  void operator()(TSParser* p) const { ts_parser_delete(p); }
};

TSParser* thread_parser() {
  thread_local std::unique_ptr<TSParser, ParserDeleter> parser = [] {
    std::unique_ptr<TSParser, ParserDeleter> p(ts_parser_new());
    ts_parser_set_language(p.get(), tree_sitter_python());
    return p;
  }();
  return parser.get();
}

void append_sexp(const SyntaxNode& n, std::string& out) {
  out += '(';
  if (n.is_named()) {
    out += n.type();
  } else {
    out += '"';
    out += n.type();
    out += '"';
  }
  if (n.is_missing()) out += " MISSING";
  for (std::uint32_t i = 0; i < n.child_count(); ++i) {
    out += ' ';
    if (auto f = n.field_name_for_child(i); !f.empty()) {
      out += f;
      out += ": ";
    }
    append_sexp(n.child(i), out);
  }
  out += ')';
}

}  // namespace

Position SyntaxNode::start() const {
  TSPoint p = ts_node_start_point(node_);
  return {p.row, p.column};
}

Position SyntaxNode::end() const {
  TSPoint p = ts_node_end_point(node_);
  return {p.row, p.column};
}

std::string_view SyntaxNode::text() const {
  std::string_view src(*source_);
  const std::uint32_t b = start_byte();
  const std::uint32_t e = end_byte();
  if (b >= src.size()) return {};
  return src.substr(b, std::min<std::size_t>(e, src.size()) - b);
}

std::vector<SyntaxNode> SyntaxNode::children() const {
  std::vector<SyntaxNode> out;
  const std::uint32_t n = child_count();
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(child(i));
  return out;
}

std::vector<SyntaxNode> SyntaxNode::named_children() const {
  std::vector<SyntaxNode> out;
  const std::uint32_t n = ts_node_named_child_count(node_);
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.emplace_back(ts_node_named_child(node_, i), source_);
  return out;
}

std::string_view SyntaxNode::field_name_for_child(std::uint32_t i) const {
  const char* name = ts_node_field_name_for_child(node_, i);
  return name ? std::string_view(name) : std::string_view();
}

std::optional<SyntaxNode> SyntaxNode::field(std::string_view name) const {
  TSNode c = ts_node_child_by_field_name(node_, name.data(), static_cast<std::uint32_t>(name.size()));
  if (ts_node_is_null(c)) return std::nullopt;
  return SyntaxNode(c, source_);
}

std::vector<SyntaxNode> SyntaxNode::fields(std::string_view name) const {
  std::vector<SyntaxNode> out;
  for (std::uint32_t i = 0; i < child_count(); ++i) {
    if (field_name_for_child(i) == name) out.push_back(child(i));
  }
  return out;
}

std::optional<SyntaxNode> SyntaxNode::parent() const {
  TSNode p = ts_node_parent(node_);
  if (ts_node_is_null(p)) return std::nullopt;
  return SyntaxNode(p, source_);
}

std::string SyntaxNode::to_sexp() const {
  std::string out;
  append_sexp(*this, out);
  return out;
}

SyntaxNode SyntaxTree::root() const { return {ts_tree_root_node(tree_.get()), text_.get()}; }

SyntaxTree parse(const SourceFile& file) {
  if (auto bad = find_invalid_utf8(file.text); bad != std::string_view::npos) {
    throw EncodingError(file.repo_relative_path, bad);
  }
  SyntaxTree tree;
  tree.path_ = file.repo_relative_path;
  tree.text_ = std::make_shared<const std::string>(file.text);
  TSTree* raw = ts_parser_parse_string(thread_parser(), nullptr, tree.text_->data(),
                                       static_cast<std::uint32_t>(tree.text_->size()));
  if (raw == nullptr) throw std::runtime_error(file.repo_relative_path + ": parser returned no tree");
  tree.tree_ = std::shared_ptr<TSTree>(raw, SyntaxTree::TreeDeleter{});
  return tree;
}

void walk(const SyntaxNode& node, const NodeVisitor& visitor) {
  // Explicit stack: deeply nested expressions must not overflow the call stack.
  std::vector<SyntaxNode> stack{node};
  while (!stack.empty()) {
    SyntaxNode n = stack.back();
    stack.pop_back();
    visitor(n);
    for (std::uint32_t i = n.child_count(); i-- > 0;) stack.push_back(n.child(i));
  }
}

void walk(const SyntaxTree& tree, const NodeVisitor& visitor) { walk(tree.root(), visitor); }

std::optional<std::string> dotted_name(const SyntaxNode& n) {
  if (n.is("identifier")) return std::string(n.text());
  if (n.is("attribute")) {
    auto object = n.field("object");
    auto attr = n.field("attribute");
    if (!object || !attr || !attr->is("identifier")) return std::nullopt;
    auto base = dotted_name(*object);
    if (!base) return std::nullopt;
    return *base + "." + std::string(attr->text());
  }
  if (n.is("dotted_name")) {
    std::string out;
    for (const auto& part : n.named_children()) {
      if (!part.is("identifier")) return std::nullopt;
      if (!out.empty()) out += '.';
      out += part.text();
    }
    return out.empty() ? std::nullopt : std::optional<std::string>(out);
  }
  return std::nullopt;
}

std::optional<SyntaxNode> docstring_node(const SyntaxNode& block_or_module) {
  for (const auto& child : block_or_module.named_children()) {
    if (child.is("comment")) continue;
    if (!child.is("expression_statement")) return std::nullopt;
    auto parts = child.named_children();
    if (parts.size() == 1 && (parts[0].is("string") || parts[0].is("concatenated_string"))) return parts[0];
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace repoctx

namespace repoctx {

bool is_statement(const SyntaxNode& n) {
  static constexpr std::string_view kinds[] = {
      "expression_statement", "import_statement", "import_from_statement", "future_import_statement",
      "function_definition", "class_definition", "decorated_definition", "if_statement", "for_statement",
      "while_statement", "try_statement", "with_statement", "match_statement", "return_statement",
      "pass_statement", "break_statement", "continue_statement", "raise_statement", "assert_statement",
      "delete_statement", "global_statement", "nonlocal_statement", "print_statement", "exec_statement",
      "type_alias_statement", "block"};
  for (auto k : kinds) {
    if (n.type() == k) return true;
  }
  return false;
}

std::vector<std::vector<SyntaxNode>> error_segments(const SyntaxNode& error) {
  std::vector<std::vector<SyntaxNode>> segments;
  std::vector<SyntaxNode> current;
  int depth = 0;
  std::uint32_t last_end_line = 0;
  auto flush = [&] {
    if (!current.empty()) segments.push_back(std::move(current));
    current.clear();
  };
  for (const auto& child : error.children()) {
    // A dedented line ends an unclosed bracket left behind by the cursor.
    if (depth > 0 && !current.empty() && child.line() > last_end_line &&
        child.start().column <= current.front().start().column) {
      depth = 0;
    }
    if (!child.is_named()) {
      auto t = child.type();
      if (t == ";" && depth == 0) {
        flush();
        continue;
      }
      if (depth == 0 && !current.empty() && child.line() > last_end_line) flush();
      if (t == "(" || t == "[" || t == "{") ++depth;
      if ((t == ")" || t == "]" || t == "}") && depth > 0) --depth;
      current.push_back(child);
      last_end_line = child.end_line();
      continue;
    }
    if (is_statement(child) && depth == 0) {
      flush();
      segments.push_back({child});
      last_end_line = child.end_line();
      continue;
    }
    if (depth == 0 && !current.empty() && child.line() > last_end_line) flush();
    current.push_back(child);
    last_end_line = child.end_line();
  }
  flush();
  return segments;
}

}  // namespace repoctx
