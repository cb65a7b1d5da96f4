#pragma once

#include <tree_sitter/api.h>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repoctx/source.hpp"

namespace repoctx {

/// Read-only view of one concrete-syntax node. Valid while the owning
/// SyntaxTree is alive.
class SyntaxNode {
 public:
  SyntaxNode() = default;
  SyntaxNode(TSNode node, const std::string* source) : node_(node), source_(source) {}

  bool valid() const noexcept { return source_ != nullptr && !ts_node_is_null(node_); }
  std::string_view type() const { return ts_node_type(node_); }
  bool is(std::string_view t) const { return type() == t; }
  bool is_named() const { return ts_node_is_named(node_); }
  bool is_error() const { return ts_node_is_error(node_); }
  bool is_missing() const { return ts_node_is_missing(node_); }
  bool has_error() const { return ts_node_has_error(node_); }

  std::uint32_t start_byte() const { return ts_node_start_byte(node_); }
  std::uint32_t end_byte() const { return ts_node_end_byte(node_); }
  Position start() const;
  Position end() const;
  /// 1-based line of the first byte.
  std::uint32_t line() const { return start().line + 1; }
  std::uint32_t end_line() const { return end().line + 1; }

  std::string_view text() const;

  std::uint32_t child_count() const { return ts_node_child_count(node_); }
  SyntaxNode child(std::uint32_t i) const { return {ts_node_child(node_, i), source_}; }
  std::vector<SyntaxNode> children() const;
  std::vector<SyntaxNode> named_children() const;
  /// Field name of child `i`, empty when unlabelled.
  std::string_view field_name_for_child(std::uint32_t i) const;
  std::optional<SyntaxNode> field(std::string_view name) const;
  std::vector<SyntaxNode> fields(std::string_view name) const;
  std::optional<SyntaxNode> parent() const;

  /// S-expression including anonymous tokens; structural identity for tests.
  std::string to_sexp() const;

  friend bool operator==(const SyntaxNode& a, const SyntaxNode& b) { return ts_node_eq(a.node_, b.node_); }

 private:
  TSNode node_{};
  const std::string* source_ = nullptr;
};

/// Immutable concrete syntax tree. Incomplete input yields error-marked
/// regions instead of a failure.
class SyntaxTree {
 public:
  SyntaxNode root() const;
  bool has_errors() const { return root().has_error(); }
  const std::string& text() const { return *text_; }
  const std::string& path() const { return path_; }

 private:
  struct TreeDeleter {
    void operator()(TSTree* t) const { ts_tree_delete(t); }
  };

  friend SyntaxTree parse(const SourceFile& file);

  std::string path_;
  std::shared_ptr<const std::string> text_;
  std::shared_ptr<TSTree> tree_;
};

/// Parses Python source. Throws EncodingError when the text is not UTF-8.
SyntaxTree parse(const SourceFile& file);

using NodeVisitor = std::function<void(const SyntaxNode&)>;

/// Pre-order, document-order traversal of every node (named and anonymous).
void walk(const SyntaxTree& tree, const NodeVisitor& visitor);
void walk(const SyntaxNode& node, const NodeVisitor& visitor);

/// True for the leaf that holds an identifier in this grammar.
inline bool is_identifier(const SyntaxNode& n) { return n.is("identifier"); }

/// Dotted name of an identifier or a pure attribute chain ("a.b.c"), else nullopt.
std::optional<std::string> dotted_name(const SyntaxNode& n);

/// Docstring literal (first statement string) of a module or block, if any.
std::optional<SyntaxNode> docstring_node(const SyntaxNode& block_or_module);

}  // namespace repoctx

namespace repoctx {

/// Splits the children of an ERROR node into statement-like segments: a new
/// segment starts at a line break outside brackets, at ';', or at a complete
/// statement node. Bracket tokens stay inside their segment.
std::vector<std::vector<SyntaxNode>> error_segments(const SyntaxNode& error);

/// True for node types that form a complete statement in this grammar.
bool is_statement(const SyntaxNode& n);

}  // namespace repoctx
