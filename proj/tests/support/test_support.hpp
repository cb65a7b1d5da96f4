#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "repoctx/context_graph.hpp"
#include "repoctx/dataflow.hpp"
#include "repoctx/source.hpp"

namespace repoctx::testing {

std::filesystem::path fixture_root();
std::filesystem::path fixture(std::string_view name);
std::filesystem::path golden(std::string_view name);
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, std::string_view text);

SourceFile source(std::string_view text, std::string_view path = "t.py");

/// Removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// An unfinished file cut from a fixture at a cursor.
struct QueryCase {
  std::string name;
  std::string repo;                // fixture directory
  std::filesystem::path file;      // absolute file holding the full code
  std::string as_path;             // repo-relative path the code claims
  Position cursor;                 // 0-based
  std::vector<std::string> relevant;  // expected qualified paths, in order
  std::vector<std::string> other;
};

std::vector<QueryCase> retrieval_cases();
SourceFile unfinished_of(const QueryCase& c);

/// Every fixture repository directory name.
std::vector<std::string> fixture_repos();

/// Package `gen/` of `files` modules, each roughly `lines` lines long, with
/// forward imports between modules. Deterministic in `seed`.
void write_synthetic_repo(const std::filesystem::path& root, int files, int lines, unsigned seed);

/// Unfinished file inside a synthetic repo: a random subset of its imports,
/// some usages, and a last line that touches one of them.
SourceFile random_query(unsigned seed, int files);

// ---- oracles -------------------------------------------------------------

using Edge = std::pair<std::size_t, std::size_t>;

/// reach[i][j]: a path of length >= 1 leads from i to j (Warshall).
std::vector<std::vector<bool>> transitive_closure(std::size_t n, const std::vector<Edge>& edges);

/// Kahn's algorithm succeeds.
bool topologically_sortable(std::size_t n, const std::vector<Edge>& edges);

/// Full-table Levenshtein distance.
std::size_t levenshtein_dp(std::string_view a, std::string_view b);

/// Full-table longest common subsequence length.
std::size_t lcs_dp(std::string_view a, std::string_view b);

/// DFG edges as index pairs.
std::vector<Edge> dfg_edges(const DataflowGraph& g);

/// Depends edges as index pairs.
std::vector<Edge> depends_edges(const ContextGraph& g);

std::string qpath(const ContextGraph& g, EntityId id);
std::vector<std::string> qpaths(const ContextGraph& g, const std::vector<EntityId>& ids);

}  // namespace repoctx::testing
