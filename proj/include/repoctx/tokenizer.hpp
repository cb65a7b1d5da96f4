#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace repoctx {

/// Token counting behind prompt budgeting. Tokenization must be lossless:
/// the tokens of a text concatenate back to the text.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::string_view name() const = 0;
  /// End offsets of consecutive tokens covering `text`.
  virtual std::vector<std::size_t> token_ends(std::string_view text) const = 0;

  std::size_t count(std::string_view text) const { return token_ends(text).size(); }
  /// Longest prefix made of at most `n` tokens.
  std::string_view head(std::string_view text, std::size_t n) const;
  /// Longest suffix made of at most `n` tokens.
  std::string_view tail(std::string_view text, std::size_t n) const;
};

/// One token per identifier run, digit run, whitespace run, or other byte.
/// Bytes >= 0x80 join identifier runs.
class ApproxTokenizer final : public Tokenizer {
 public:
  std::string_view name() const override { return "approx"; }
  std::vector<std::size_t> token_ends(std::string_view text) const override;
};

/// One token per UTF-8 code point.
class CharTokenizer final : public Tokenizer {
 public:
  std::string_view name() const override { return "char"; }
  std::vector<std::size_t> token_ends(std::string_view text) const override;
};

/// "approx" or "char"; throws std::invalid_argument otherwise.
std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name);
std::vector<std::string> tokenizer_names();

}  // namespace repoctx
