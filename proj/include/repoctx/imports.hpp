#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repoctx/syntax.hpp"

namespace repoctx {

/// One local name bound by an import statement.
struct ImportBinding {
  std::string alias;          // name bound in the importing file; "*" for star imports
  std::uint32_t level = 0;    // leading dots of a relative import
  std::string module;         // dotted module path without the leading dots
  std::string name;           // imported member of a from-import; empty for `import m`
  std::uint32_t line = 0;     // 1-based line of the statement
  bool from_import = false;
  bool aliased = false;       // `as` clause present

  bool star() const { return from_import && name == "*"; }
  friend bool operator==(const ImportBinding&, const ImportBinding&) = default;
};

/// Where a dotted usage of an imported name points: a module plus a dotted
/// member path inside it (empty member = the module itself).
struct ImportTarget {
  std::uint32_t level = 0;
  std::string module;
  std::string name;

  friend bool operator==(const ImportTarget&, const ImportTarget&) = default;
};

/// Bindings of an import_statement / import_from_statement node.
std::vector<ImportBinding> bindings_of(const SyntaxNode& statement);

/// Bindings recoverable from a segment of an ERROR node (see error_segments).
std::vector<ImportBinding> salvage_import(std::span<const SyntaxNode> segment);

/// Every import binding in the file, in document order, including imports
/// nested in functions and imports salvaged from unfinished statements.
std::vector<ImportBinding> extract_imports(const SyntaxTree& tree);

/// Maps a dotted usage (`alias` or `alias.attr...`) onto its import target;
/// nullopt when the usage is not rooted at the binding's alias.
std::optional<ImportTarget> import_target(const ImportBinding& binding, std::string_view usage);

}  // namespace repoctx
