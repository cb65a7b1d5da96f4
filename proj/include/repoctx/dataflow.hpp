#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "repoctx/source.hpp"
#include "repoctx/syntax.hpp"

namespace repoctx {

/// The type-sensitive dependency kinds kept in the graph. Everything else
/// (call arguments, conditions, container elements) is pruned.
enum class Relation : std::uint8_t { Assigns, As, Refers, Typeof, Inherits };

inline constexpr std::array<Relation, 5> kAllRelations = {Relation::Assigns, Relation::As, Relation::Refers,
                                                          Relation::Typeof, Relation::Inherits};

std::string_view relation_name(Relation r) noexcept;
std::optional<Relation> parse_relation(std::string_view name) noexcept;

/// An occurrence of a variable or attribute chain on one source line.
struct DfgNode {
  std::string name;        // "newSignal", "signal.getSignalByName"
  std::uint32_t line = 0;  // 1-based

  friend auto operator<=>(const DfgNode&, const DfgNode&) = default;
};

struct DfgTriplet {
  DfgNode head;
  Relation relation = Relation::Assigns;
  DfgNode tail;

  friend auto operator<=>(const DfgTriplet&, const DfgTriplet&) = default;
};

using NodeId = std::uint32_t;

struct DfgEdge {
  NodeId head = 0;
  Relation relation = Relation::Assigns;
  NodeId tail = 0;

  friend auto operator<=>(const DfgEdge&, const DfgEdge&) = default;
};

/// Directed acyclic graph of line-instanced occurrences. Node ids follow
/// creation order and every edge satisfies head < tail, so the id order is a
/// topological order.
class DataflowGraph {
 public:
  DataflowGraph() = default;
  DataflowGraph(std::vector<DfgNode> nodes, std::vector<DfgEdge> edges);

  const std::vector<DfgNode>& nodes() const noexcept { return nodes_; }
  const std::vector<DfgEdge>& edges() const noexcept { return edges_; }
  const DfgNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }

  std::optional<NodeId> find(const DfgNode& n) const;
  std::vector<NodeId> nodes_on_line(std::uint32_t line) const;
  /// Indices into edges() leaving / entering a node.
  std::span<const std::uint32_t> out_edges(NodeId id) const;
  std::span<const std::uint32_t> in_edges(NodeId id) const;

  std::set<DfgTriplet> triplets() const;

 private:
  std::vector<DfgNode> nodes_;
  std::vector<DfgEdge> edges_;
  std::map<DfgNode, NodeId> index_;
  std::vector<std::uint32_t> out_offsets_, out_list_;
  std::vector<std::uint32_t> in_offsets_, in_list_;
};

/// Extended dataflow graph of one file. Never fails; unknown constructs and
/// unparsable regions contribute what can be salvaged.
DataflowGraph build_dfg(const SyntaxTree& tree, const SourceFile& file);

/// `name` plus every attribute chain reached over Refers edges from a node
/// whose name equals or extends `name`.
std::set<std::string> expand_refers(const DataflowGraph& graph, std::string_view name);

/// Nodes on `cursor_line` and every node that reaches them.
std::set<DfgNode> last_line_dependencies(const DataflowGraph& graph, std::uint32_t cursor_line);

/// Rewrites every node derived from `root` into a dotted name rooted at
/// `root_name`: type hints and assignments carry the name over, attribute
/// chains extend it (`signal: R` then `signal.get` yields "R.get"). Each
/// derived name maps to the nodes that support it.
std::map<std::string, std::vector<NodeId>> propagate_names(const DataflowGraph& graph, NodeId root,
                                                           std::string_view root_name);

/// One line per triplet: `head -Relation-> tail @head_line,tail_line`.
std::string dump_triplets(const DataflowGraph& graph);

}  // namespace repoctx
