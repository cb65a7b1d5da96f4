#include <gtest/gtest.h>

#include "repoctx/prompt.hpp"
#include "test_support.hpp"

using namespace repoctx;
namespace rt = repoctx::testing;

namespace {

struct Synthetic {
  rt::TempDir dir;
  ContextGraph graph;
  Synthetic() {
    rt::write_synthetic_repo(dir.path(), 25, 100, 1234);
    graph = index_repository(dir.path());
  }
};

const Synthetic& synthetic() {
  static Synthetic s;
  return s;
}

}  // namespace

TEST(BudgetProperty, FinalPromptFitsAndRelevantStaysWhole) {
  const auto& g = synthetic().graph;
  std::mt19937 rng(2024);
  std::size_t with_other = 0;
  for (unsigned i = 0; i < 300; ++i) {
    auto code = rt::random_query(1000 + i, 25);
    const std::size_t total = std::uniform_int_distribution<std::size_t>(64, 3000)(rng);
    auto tok = make_tokenizer(i % 2 ? "approx" : "char");
    const Scope scope = i % 3 ? Scope::Complete : Scope::Definition;
    auto plan = build_prompt(code, g, {total, scope}, *tok);
    ASSERT_LE(plan.prompt_tokens, total);
    ASSERT_EQ(tok->count(plan.final_prompt), plan.prompt_tokens);
    ASSERT_LE(plan.budget.knowledge_alloc + plan.budget.code_alloc, total);
    if (plan.knowledge.accepted_other > 0) {
      ++with_other;
      ASSERT_FALSE(plan.knowledge.truncated);
      std::vector<EntityId> ec = plan.retrieval.relevant;
      ec.insert(ec.end(), plan.retrieval.other.begin(), plan.retrieval.other.begin() + plan.knowledge.accepted_other);
      ASSERT_EQ(plan.knowledge.text, organize_bk(ec, g, scope));
    }
    if (!plan.knowledge.text.empty()) ASSERT_TRUE(plan.final_prompt.starts_with("'''\n"));
    ASSERT_TRUE(code.text.ends_with(plan.code_suffix));
  }
  EXPECT_GT(with_other, 0u);
}

TEST(PrefixStability, RelevantOnlyKnowledgeIsAPrefixOfItsRendering) {
  const auto& g = synthetic().graph;
  ApproxTokenizer tok;
  for (unsigned i = 0; i < 200; ++i) {
    auto code = rt::random_query(5000 + i, 25);
    auto r = retrieve(code, end_position(code.text).line + 1, g);
    const auto er_text = organize_bk(r.relevant, g, Scope::Complete);
    for (std::size_t n : {0u, 50u, 200u, 800u, 5000u}) {
      auto k = generate_bk(r.relevant, r.other, n, g, Scope::Complete, tok);
      if (k.accepted_other == 0) ASSERT_TRUE(er_text.starts_with(k.text)) << n;
    }
  }
}

TEST(Determinism, RepeatedPipelineIsByteIdentical) {
  rt::TempDir a, b;
  rt::write_synthetic_repo(a.path(), 12, 80, 77);
  rt::write_synthetic_repo(b.path(), 12, 80, 77);
  auto ga = index_repository(a.path(), {4});
  auto gb = index_repository_serial(b.path());
  EXPECT_EQ(format_stats(stats_of(ga)), format_stats(stats_of(gb)));
  ApproxTokenizer tok;
  for (unsigned i = 0; i < 20; ++i) {
    auto code = rt::random_query(9000 + i, 12);
    EXPECT_EQ(build_prompt(code, ga, {}, tok).final_prompt, build_prompt(code, gb, {}, tok).final_prompt);
  }
}
