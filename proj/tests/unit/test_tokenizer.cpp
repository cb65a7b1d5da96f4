#include <gtest/gtest.h>

#include <random>

#include "repoctx/tokenizer.hpp"

using namespace repoctx;

namespace {

std::vector<std::string> pieces(const Tokenizer& t, std::string_view s) {
  std::vector<std::string> out;
  std::size_t prev = 0;
  for (auto e : t.token_ends(s)) {
    out.emplace_back(s.substr(prev, e - prev));
    prev = e;
  }
  return out;
}

}  // namespace

TEST(ApproxTokenizer, Boundaries) {
  ApproxTokenizer t;
  EXPECT_EQ(pieces(t, "foo = bar1(22)\n\n"),
            (std::vector<std::string>{"foo", " ", "=", " ", "bar1", "(", "22", ")", "\n\n"}));
  EXPECT_EQ(pieces(t, "1x"), (std::vector<std::string>{"1", "x"}));
  EXPECT_EQ(pieces(t, "caf\xC3\xA9_2"), (std::vector<std::string>{"caf\xC3\xA9_2"}));
  EXPECT_EQ(t.count(""), 0u);
  EXPECT_EQ(t.count("'''"), 3u);
}

TEST(CharTokenizer, CodePoints) {
  CharTokenizer t;
  EXPECT_EQ(t.count("ab"), 2u);
  EXPECT_EQ(t.count("caf\xC3\xA9"), 4u);
  EXPECT_EQ(t.count("\xF0\x9F\x98\x80!"), 2u);
}

TEST(Tokenizer, HeadAndTail) {
  ApproxTokenizer t;
  const std::string s = "a + b";
  EXPECT_EQ(t.head(s, 0), "");
  EXPECT_EQ(t.head(s, 2), "a ");
  EXPECT_EQ(t.head(s, 99), s);
  EXPECT_EQ(t.tail(s, 0), "");
  EXPECT_EQ(t.tail(s, 2), " b");
  EXPECT_EQ(t.tail(s, 5), s);
}

TEST(Tokenizer, Registry) {
  for (const auto& n : tokenizer_names()) EXPECT_EQ(make_tokenizer(n)->name(), n);
  EXPECT_THROW(make_tokenizer("starcoder"), std::invalid_argument);
}

TEST(TokenizerProperty, LosslessAndMonotone) {
  std::mt19937 rng(17);
  const std::string alphabet = "ab_9 \n\t(.)='\xC3\xA9";
  for (const auto& name : tokenizer_names()) {
    auto t = make_tokenizer(name);
    for (int round = 0; round < 300; ++round) {
      std::string s;
      const int n = std::uniform_int_distribution<int>(0, 40)(rng);
      for (int i = 0; i < n; ++i) {
        const auto k = std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 2)(rng);
        if (alphabet[k] == '\xC3') s += "\xC3\xA9"; else if (alphabet[k] != '\xA9') s += alphabet[k];
      }
      std::string joined;
      for (const auto& p : pieces(*t, s)) {
        EXPECT_FALSE(p.empty());
        joined += p;
      }
      EXPECT_EQ(joined, s);
      const auto total = t->count(s);
      for (std::size_t k = 0; k <= total + 1; ++k) {
        EXPECT_LE(t->count(t->head(s, k)), k);
        EXPECT_LE(t->count(t->tail(s, k)), k);
        EXPECT_TRUE(s.starts_with(t->head(s, k)));
        EXPECT_TRUE(s.ends_with(t->tail(s, k)));
      }
      // Concatenation never costs more than the parts.
      const std::string u = s + s;
      EXPECT_LE(t->count(u), 2 * total);
    }
  }
}
