#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "repoctx/context_graph.hpp"
#include "repoctx/dataflow.hpp"
#include "repoctx/source.hpp"

namespace repoctx {

/// A (module, name) pair taken from one import statement, possibly
/// extended with attribute suffixes observed in the unfinished code.
struct ImportInfo {
  std::uint32_t level = 0;
  std::string module;
  std::string name;  // empty: the module itself
  std::uint32_t origin_line = 0;
  bool star = false;
  std::set<DfgNode> support;  // occurrences that carry this name

  std::string display() const;  // "(.pkg.mod, Name.attr)"
};

/// The unfinished code, parsed once.
struct UnfinishedCode {
  SourceFile file;
  DataflowGraph graph;
  std::vector<ImportBinding> imports;
};

UnfinishedCode analyze_unfinished(const SourceFile& file);

std::vector<ImportInfo> collect_imports(const UnfinishedCode& code);
std::vector<ImportInfo> collect_imports(const SourceFile& file);

/// Deepest entity the info points at; nullopt for non-local modules.
std::optional<EntityId> resolve(const ImportInfo& info, std::string_view importer_path, const ContextGraph& graph);

/// Entities reachable over depends edges in depth-first preorder, excluding
/// `entity` itself.
std::vector<EntityId> dependency_closure(EntityId entity, const ContextGraph& graph);

struct RetrievalResult {
  std::vector<EntityId> relevant;  // E_r
  std::vector<EntityId> other;     // E_o
  std::map<EntityId, std::vector<EntityId>> closure;
  std::vector<ImportInfo> imports;
  std::vector<std::optional<EntityId>> resolved;  // parallel to imports
};

/// `cursor_line` is 1-based.
RetrievalResult retrieve(const UnfinishedCode& code, std::uint32_t cursor_line, const ContextGraph& graph);
RetrievalResult retrieve(const SourceFile& unfinished, std::uint32_t cursor_line, const ContextGraph& graph);

/// Line-oriented dump of imports and the partition.
std::string format_retrieval(const RetrievalResult& r, const ContextGraph& graph);

}  // namespace repoctx
