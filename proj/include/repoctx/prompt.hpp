#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "repoctx/context_graph.hpp"
#include "repoctx/retrieval.hpp"
#include "repoctx/source.hpp"
#include "repoctx/tokenizer.hpp"

namespace repoctx {

enum class Scope : std::uint8_t { Definition, Complete };

std::string_view scope_name(Scope s) noexcept;
/// "definition" or "complete"; throws std::invalid_argument otherwise.
Scope parse_scope(std::string_view name);

struct TokenBudget {
  std::size_t total = 0;
  std::size_t knowledge_alloc = 0;
  std::size_t code_alloc = 0;

  friend bool operator==(const TokenBudget&, const TokenBudget&) = default;
};

/// Half of `total` to each side; a side that needs less than its half hands
/// the surplus to the other.
TokenBudget allocate(std::size_t total, std::size_t knowledge_len, std::size_t code_len);

/// Text of one entity with its original indentation, newline-terminated.
/// Classes render as header, docstring and members.
std::string render_entity(const ContextGraph& graph, EntityId id, Scope scope);

/// Modules of `entities` (closures included), in output order.
std::vector<EntityId> module_order(const std::vector<EntityId>& entities, const ContextGraph& graph);

/// Groups `entities` and their dependency closures by module and joins the
/// module renderings, dependent modules first.
std::string organize_bk(const std::vector<EntityId>& entities, const ContextGraph& graph, Scope scope);

struct Knowledge {
  std::string text;
  std::size_t accepted_other = 0;  // leading entities of E_o that fit
  bool truncated = false;
};

Knowledge generate_bk(const std::vector<EntityId>& relevant, const std::vector<EntityId>& other, std::size_t n,
                      const ContextGraph& graph, Scope scope, const Tokenizer& tokenizer);

/// bk inside triple-single-quote delimiters, newline-terminated.
std::string wrap_knowledge(std::string_view bk);

struct PromptOptions {
  std::size_t max_tokens = 2048;
  Scope scope = Scope::Complete;
};

struct PromptPlan {
  Scope scope = Scope::Complete;
  TokenBudget budget;
  std::vector<EntityId> module_order;
  RetrievalResult retrieval;
  Knowledge knowledge;
  std::string code_suffix;
  std::string final_prompt;
  std::size_t prompt_tokens = 0;
  double elapsed_ms = 0;
};

/// `unfinished` is the code before the cursor; its last line is the line
/// being completed.
PromptPlan build_prompt(const SourceFile& unfinished, const ContextGraph& graph, const PromptOptions& options,
                        const Tokenizer& tokenizer);

/// Cuts `file` at `cursor` (0-based line, byte column).
SourceFile unfinished_prefix(const SourceFile& file, Position cursor);

}  // namespace repoctx
