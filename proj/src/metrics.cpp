#include "repoctx/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace repoctx {

std::string_view strip(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return s.substr(0, 0);
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

int exact_match(std::string_view prediction, std::string_view reference) {
  return strip(prediction) == strip(reference) ? 1 : 0;
}

std::size_t indel_distance(std::string_view a, std::string_view b) {
  // |a| + |b| - 2 * LCS, with a rolling row.
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return a.size() + b.size() - 2 * row[b.size()];
}

double edit_similarity(std::string_view prediction, std::string_view reference) {
  const auto a = strip(prediction);
  const auto b = strip(reference);
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return 1.0 - static_cast<double>(indel_distance(a, b)) / static_cast<double>(total);
}

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",    "True",    "and",    "as",       "assert", "async", "await",  "break", "class",
    "continue", "def",  "del",     "elif",   "else",     "except", "finally", "for",  "from",  "global",
    "if",    "import",  "in",      "is",     "lambda",   "nonlocal", "not", "or",     "pass",  "raise",
    "return", "try",    "while",   "with",   "yield"};

// Soft keywords (match, case, type) count as names.
bool is_keyword(std::string_view w) {
  return std::find(kKeywords.begin(), kKeywords.end(), w) != kKeywords.end();
}

bool word_start(unsigned char c) { return c >= 0x80 || c == '_' || std::isalpha(c); }
bool word_char(unsigned char c) { return word_start(c) || std::isdigit(c); }

bool string_prefix(std::string_view w) {
  if (w.size() > 2) return false;
  for (char c : w) {
    const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
  }
  return true;
}

std::size_t skip_string(std::string_view s, std::size_t i) {
  const char q = s[i];
  const bool triple = s.substr(i, 3) == std::string_view(std::string(3, q));
  const std::string_view close = triple ? (q == '"' ? "\"\"\"" : "'''") : (q == '"' ? "\"" : "'");
  std::size_t j = i + close.size();
  while (j < s.size()) {
    if (s[j] == '\\') {
      j += 2;
      continue;
    }
    if (s.substr(j, close.size()) == close) return j + close.size();
    ++j;
  }
  return s.size();
}

}  // namespace

std::vector<std::string> extract_identifiers(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == '#') break;
    if (c == '"' || c == '\'') {
      i = skip_string(s, i);
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      // Numeric literal, including exponents, hex digits and suffixes.
      ++i;
      while (i < s.size() && (word_char(static_cast<unsigned char>(s[i])) || s[i] == '.' ||
                              ((s[i] == '+' || s[i] == '-') && (s[i - 1] == 'e' || s[i - 1] == 'E')))) {
        ++i;
      }
      continue;
    }
    if (word_start(c)) {
      std::size_t j = i;
      while (j < s.size() && word_char(static_cast<unsigned char>(s[j]))) ++j;
      std::string_view w = s.substr(i, j - i);
      if (j < s.size() && (s[j] == '"' || s[j] == '\'') && string_prefix(w)) {
        i = skip_string(s, j);
        continue;
      }
      if (!is_keyword(w)) out.emplace_back(w);
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

IdentifierScore identifier_metrics(std::string_view prediction, std::string_view reference) {
  const auto p = extract_identifiers(prediction);
  const auto r = extract_identifiers(reference);
  IdentifierScore score;
  score.id_em = p == r ? 1 : 0;
  const std::set<std::string> ps(p.begin(), p.end());
  const std::set<std::string> rs(r.begin(), r.end());
  if (ps.empty() && rs.empty()) {
    score.f1 = 1.0;
    return score;
  }
  if (ps.empty() || rs.empty()) {
    score.id_em = 0;
    score.f1 = 0.0;
    return score;
  }
  std::size_t common = 0;
  for (const auto& x : ps) common += rs.contains(x) ? 1 : 0;
  if (common == 0) return score;
  const double precision = static_cast<double>(common) / static_cast<double>(ps.size());
  const double recall = static_cast<double>(common) / static_cast<double>(rs.size());
  score.f1 = 2 * precision * recall / (precision + recall);
  return score;
}

std::string first_line(std::string_view completion) {
  auto nl = completion.find('\n');
  std::string_view l = completion.substr(0, nl);
  if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return std::string(l);
}

}  // namespace repoctx
