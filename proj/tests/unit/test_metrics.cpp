#include <gtest/gtest.h>

#include <random>

#include "repoctx/metrics.hpp"
#include "test_support.hpp"

using namespace repoctx;
namespace rt = repoctx::testing;

namespace {

// Oracle F1 from set arithmetic.
double f1_oracle(const std::vector<std::string>& p, const std::vector<std::string>& r) {
  std::set<std::string> a(p.begin(), p.end()), b(r.begin(), r.end());
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  if (common == 0) return 0.0;
  const double prec = double(common) / a.size();
  const double rec = double(common) / b.size();
  return 2 * prec * rec / (prec + rec);
}

}  // namespace

TEST(ExactMatch, Examples) {
  EXPECT_EQ(exact_match("x = 1", "x = 1"), 1);
  EXPECT_EQ(exact_match("setSignalTypeFromTypeStr()", "setSignalTypeFromTypeStr()"), 1);
  EXPECT_EQ(exact_match("x = 1", "x = 2"), 0);
  EXPECT_EQ(exact_match("  x = 1\n", "x = 1"), 1);
}

TEST(EditSimilarity, Examples) {
  EXPECT_DOUBLE_EQ(edit_similarity("abc", "abc"), 1.0);
  EXPECT_DOUBLE_EQ(edit_similarity("", ""), 1.0);
  EXPECT_NEAR(edit_similarity("abc", "abd"), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(edit_similarity("", "abcd"), 0.0);
  EXPECT_NEAR(edit_similarity("channel = newChannelName", "setSignalTypeFromTypeStr()"), 0.24, 0.005);
}

TEST(EditSimilarity, AgreesWithLevenshteinOracleOnListedPairs) {
  // Both closed forms coincide on substitution-free or single-edit pairs.
  EXPECT_EQ(rt::levenshtein_dp("abc", "abd"), 1u);
  EXPECT_NEAR(1.0 - rt::levenshtein_dp("abc", "abd") / 3.0, edit_similarity("abc", "abd"), 1e-12);
  EXPECT_EQ(rt::levenshtein_dp("", "abcd"), 4u);
  EXPECT_NEAR(1.0 - rt::levenshtein_dp("", "abcd") / 4.0, edit_similarity("", "abcd"), 1e-12);
}

TEST(IndelDistance, MatchesLcsTable) {
  std::mt19937 rng(23);
  for (int round = 0; round < 500; ++round) {
    std::string a, b;
    for (int i = std::uniform_int_distribution<int>(0, 15)(rng); i > 0; --i) a += "abc"[rng() % 3];
    for (int i = std::uniform_int_distribution<int>(0, 15)(rng); i > 0; --i) b += "abc"[rng() % 3];
    EXPECT_EQ(indel_distance(a, b), a.size() + b.size() - 2 * rt::lcs_dp(a, b));
    // Indel distance is bounded by Levenshtein from below and its double from above.
    EXPECT_GE(indel_distance(a, b), rt::levenshtein_dp(a, b));
    EXPECT_LE(indel_distance(a, b), 2 * rt::levenshtein_dp(a, b));
  }
}

TEST(MetricProperty, EditSimilarityBoundsAndSymmetry) {
  std::mt19937 rng(29);
  for (int round = 0; round < 500; ++round) {
    std::string a, b;
    for (int i = std::uniform_int_distribution<int>(0, 20)(rng); i > 0; --i) a += "ab (x)."[rng() % 7];
    for (int i = std::uniform_int_distribution<int>(0, 20)(rng); i > 0; --i) b += "ab (x)."[rng() % 7];
    const double s = edit_similarity(a, b);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_DOUBLE_EQ(s, edit_similarity(b, a));
    EXPECT_DOUBLE_EQ(edit_similarity(a, a), 1.0);
    EXPECT_EQ(exact_match(a, a), 1);
    auto id = identifier_metrics(a, a);
    EXPECT_EQ(id.id_em, 1);
    EXPECT_DOUBLE_EQ(id.f1, 1.0);
    auto ab = identifier_metrics(a, b);
    EXPECT_NEAR(ab.f1, f1_oracle(extract_identifiers(a), extract_identifiers(b)), 1e-12);
    if (ab.id_em == 1) EXPECT_DOUBLE_EQ(ab.f1, 1.0);
  }
}

TEST(Identifiers, Extraction) {
  EXPECT_EQ(extract_identifiers("foo.bar(x)"), (std::vector<std::string>{"foo", "bar", "x"}));
  EXPECT_EQ(extract_identifiers("return self.x if not y else None"), (std::vector<std::string>{"self", "x", "y"}));
  EXPECT_EQ(extract_identifiers("f('a b', r\"c\", 12, 0x1F, 1e5)  # d"), (std::vector<std::string>{"f"}));
  EXPECT_EQ(extract_identifiers("x = \"\"\"doc"), (std::vector<std::string>{"x"}));
  EXPECT_EQ(extract_identifiers("match = case(type)"), (std::vector<std::string>{"match", "case", "type"}));
  EXPECT_EQ(extract_identifiers("(a, b"), (std::vector<std::string>{"a", "b"}));
}

TEST(IdentifierMetrics, Examples) {
  auto same = identifier_metrics("foo.bar(x)", "foo.bar(x)");
  EXPECT_EQ(same.id_em, 1);
  EXPECT_DOUBLE_EQ(same.f1, 1.0);
  auto diff = identifier_metrics("foo.bar(x)", "foo.baz(x)");
  EXPECT_EQ(diff.id_em, 0);
  EXPECT_NEAR(diff.f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(diff.f1, f1_oracle({"foo", "bar", "x"}, {"foo", "baz", "x"}), 1e-12);
  auto swapped = identifier_metrics("a(b)", "b(a)");
  EXPECT_EQ(swapped.id_em, 0);
  EXPECT_DOUBLE_EQ(swapped.f1, 1.0);
  auto empty = identifier_metrics("1 + 2", "'s'");
  EXPECT_EQ(empty.id_em, 1);
  EXPECT_DOUBLE_EQ(empty.f1, 1.0);
  auto one = identifier_metrics("x", "42");
  EXPECT_EQ(one.id_em, 0);
  EXPECT_DOUBLE_EQ(one.f1, 0.0);
}

TEST(FirstLine, Extraction) {
  EXPECT_EQ(first_line("a()\nb()"), "a()");
  EXPECT_EQ(first_line("a()\r\nb()"), "a()");
  EXPECT_EQ(first_line(""), "");
}
