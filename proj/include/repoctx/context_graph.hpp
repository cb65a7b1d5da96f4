#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repoctx/imports.hpp"
#include "repoctx/source.hpp"

namespace repoctx {

enum class EntityKind : std::uint8_t { Module, Class, Function, Variable };

std::string_view kind_name(EntityKind k) noexcept;
std::optional<EntityKind> parse_kind(std::string_view name) noexcept;

using EntityId = std::uint32_t;

/// A module, class, function or module/class-level variable statement.
///
/// Text fields are verbatim slices of the file that start at the beginning
/// of their first line, so they keep the original indentation.
struct CodeEntity {
  EntityKind kind = EntityKind::Module;
  std::string name;            // "RecordSignal"; module: file stem or package name
  std::string qualified_path;  // "pkg/mod.py", "pkg/mod.py:Class.method", "pkg/mod.py:x@12"
  std::string file_path;       // repo-relative path of the defining file
  std::string signature;       // decorators + header through its ':' (Class/Function)
  std::optional<std::string> docstring;
  std::string body;            // Function: whole definition; Variable: the statement
  std::string body_indent;     // indentation of the first body statement (Class/Function)
  std::vector<std::string> aliases;  // further names bound by a Variable statement
  std::uint32_t start_line = 0;      // 1-based; 0 for Module
  std::uint32_t end_line = 0;
  bool synthetic = false;  // directory without __init__.py

  friend bool operator==(const CodeEntity&, const CodeEntity&) = default;
};

struct Diagnostic {
  enum class Severity : std::uint8_t { Warning, Error };
  Severity severity = Severity::Warning;
  std::string kind;  // "dangling-import", "unreadable-file", ...
  std::string file;
  std::uint32_t line = 0;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Where an import-rooted name resolved to.
struct Resolution {
  EntityId entity = 0;
  bool exact = false;  // every segment of the name matched
};

/// Repository-wide entity graph with contains (nesting) and depends
/// (dataflow-derived) edges. Immutable once built by link_imports or load.
class ContextGraph {
 public:
  ContextGraph() = default;

  EntityId add_entity(CodeEntity e, std::optional<EntityId> parent);
  void add_depends(EntityId from, EntityId to);
  void add_diagnostic(Diagnostic d) { diagnostics_.push_back(std::move(d)); }
  /// Absolute repository root the graph was built from; may be empty.
  void set_root(std::string root) { root_ = std::move(root); }
  const std::string& root() const noexcept { return root_; }
  /// Sorts adjacency lists; called once construction is complete.
  void finalize();

  const std::vector<CodeEntity>& entities() const noexcept { return entities_; }
  const CodeEntity& entity(EntityId id) const { return entities_.at(id); }
  std::size_t size() const noexcept { return entities_.size(); }
  std::optional<EntityId> find(std::string_view qualified_path) const;

  std::optional<EntityId> parent(EntityId id) const;
  /// Children in start_line order.
  std::span<const EntityId> children(EntityId id) const;
  /// Depends targets in id order.
  std::span<const EntityId> depends(EntityId id) const;
  /// The Module entity containing `id` (itself for modules).
  EntityId module_of(EntityId id) const;
  /// Module entity of a repo-relative .py path or package directory.
  std::optional<EntityId> module_at(std::string_view path) const;
  std::vector<EntityId> modules() const;

  std::size_t contains_count() const;
  std::size_t depends_count() const;
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

  /// Resolves `module` (with `level` leading dots) relative to the importing
  /// file, then walks `name` segment by segment down contains edges, with
  /// submodules as fallback. Returns the deepest match; nullopt when the
  /// module is not part of the repository.
  std::optional<Resolution> resolve(std::string_view importer_path, std::uint32_t level, std::string_view module,
                                    std::string_view name) const;

  /// Child of `parent` named `name` (Variable aliases included); smallest
  /// start_line wins.
  std::optional<EntityId> child_named(EntityId parent, std::string_view name) const;

  /// True when some repository file or directory is the top-level package `head`.
  bool has_top_level(std::string_view head) const;

  friend bool operator==(const ContextGraph& a, const ContextGraph& b);

 private:
  std::optional<EntityId> module_in_dir(const std::string& dir, const std::string& segment) const;
  std::optional<std::string> package_dir(EntityId module) const;

  std::vector<CodeEntity> entities_;
  std::vector<std::optional<EntityId>> parents_;
  std::vector<std::vector<EntityId>> children_;
  std::vector<std::vector<EntityId>> depends_;
  std::map<std::string, EntityId, std::less<>> by_path_;
  std::map<std::string, EntityId, std::less<>> modules_by_file_;
  std::vector<Diagnostic> diagnostics_;
  std::string root_;
};

/// Cross-file reference recorded while indexing one file.
struct PendingImport {
  std::uint32_t from = 0;  // local entity index
  ImportTarget target;
  bool star_lookup = false;  // name looked up in a star-imported module
};

/// Entities, contains and intra-file depends edges of one file, before
/// imports are linked.
struct FileIndex {
  std::string path;
  std::vector<CodeEntity> entities;             // [0] is the Module
  std::vector<std::optional<std::uint32_t>> parents;  // local indices
  std::vector<std::pair<std::uint32_t, std::uint32_t>> depends;
  std::vector<PendingImport> pending;
  std::vector<ImportBinding> imports;
  std::vector<Diagnostic> diagnostics;
};

FileIndex index_file(const SourceFile& file);

/// Merges per-file results, resolves imports and adds synthetic directory
/// modules. `files` may be in any order; the result is deterministic.
ContextGraph link_imports(std::vector<FileIndex> files);

/// Repo-relative paths of every .py file under root, sorted. Hidden
/// directories and __pycache__ are skipped.
std::vector<std::string> discover_sources(const std::filesystem::path& root);

struct IndexOptions {
  int jobs = 0;  // <= 0: all cores
};

/// Reads, parses and indexes every file in parallel, then links.
ContextGraph index_repository(const std::filesystem::path& root, const IndexOptions& options = {});
/// Single-threaded reference with identical output.
ContextGraph index_repository_serial(const std::filesystem::path& root);

struct GraphStats {
  std::map<EntityKind, std::size_t> entities;
  std::size_t contains = 0;
  std::size_t depends = 0;
  std::size_t diagnostics = 0;
};

GraphStats stats_of(const ContextGraph& graph);
/// "modules 3\nclasses 2\n..." one count per line.
std::string format_stats(const GraphStats& s);

inline constexpr int kGraphFormatVersion = 1;

/// Writes a magic line followed by a versioned JSON document.
void save_graph(const ContextGraph& graph, const std::filesystem::path& path);
/// Throws FormatError on a foreign, truncated or version-mismatched file.
ContextGraph load_graph(const std::filesystem::path& path);

std::string serialize_graph(const ContextGraph& graph);
ContextGraph deserialize_graph(std::string_view data);

}  // namespace repoctx
