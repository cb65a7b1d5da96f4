#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repoctx {

/// Leading and trailing whitespace removed.
std::string_view strip(std::string_view s) noexcept;

/// 1 when the stripped strings are equal.
int exact_match(std::string_view prediction, std::string_view reference);

/// Character-level insertion/deletion distance.
std::size_t indel_distance(std::string_view a, std::string_view b);

/// 1 - indel(a, b) / (|a| + |b|) over the stripped strings; 1 when both are
/// empty. Symmetric and within [0, 1].
double edit_similarity(std::string_view prediction, std::string_view reference);

/// Identifiers in occurrence order, skipping keywords, string and numeric
/// literals and comments. Tolerates unbalanced quotes and brackets.
std::vector<std::string> extract_identifiers(std::string_view code);

struct IdentifierScore {
  int id_em = 0;
  double f1 = 0;
};

IdentifierScore identifier_metrics(std::string_view prediction, std::string_view reference);

/// First line of a completion.
std::string first_line(std::string_view completion);

}  // namespace repoctx
