#include "repoctx/tokenizer.hpp"

#include <stdexcept>

namespace repoctx {

std::string_view Tokenizer::head(std::string_view text, std::size_t n) const {
  if (n == 0) return text.substr(0, 0);
  auto ends = token_ends(text);
  if (ends.size() <= n) return text;
  return text.substr(0, ends[n - 1]);
}

std::string_view Tokenizer::tail(std::string_view text, std::size_t n) const {
  auto ends = token_ends(text);
  if (ends.size() <= n) return text;
  if (n == 0) return text.substr(text.size());
  return text.substr(ends[ends.size() - n - 1]);
}

namespace {

enum class Class { Word, Digit, Space, Other };

Class classify(unsigned char c) {
  if (c >= 0x80 || c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return Class::Word;
  if (c >= '0' && c <= '9') return Class::Digit;
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') return Class::Space;
  return Class::Other;
}

}  // namespace

std::vector<std::size_t> ApproxTokenizer::token_ends(std::string_view text) const {
  std::vector<std::size_t> ends;
  std::size_t i = 0;
  while (i < text.size()) {
    const Class c = classify(static_cast<unsigned char>(text[i]));
    std::size_t j = i + 1;
    if (c != Class::Other) {
      while (j < text.size()) {
        const Class d = classify(static_cast<unsigned char>(text[j]));
        // Digits continue an identifier ("x2"), not the other way round.
        if (d == c || (c == Class::Word && d == Class::Digit)) {
          ++j;
        } else {
          break;
        }
      }
    }
    ends.push_back(j);
    i = j;
  }
  return ends;
}

std::vector<std::size_t> CharTokenizer::token_ends(std::string_view text) const {
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto next = i + 1 < text.size() ? static_cast<unsigned char>(text[i + 1]) : 0;
    if (i + 1 == text.size() || (next & 0xC0) != 0x80) ends.push_back(i + 1);
  }
  return ends;
}

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name) {
  if (name == "approx") return std::make_unique<ApproxTokenizer>();
  if (name == "char") return std::make_unique<CharTokenizer>();
  throw std::invalid_argument("unknown tokenizer: " + std::string(name));
}

std::vector<std::string> tokenizer_names() { return {"approx", "char"}; }

}  // namespace repoctx
