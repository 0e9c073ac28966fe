#ifndef OAAUDIT_TEXT_HPP
#define OAAUDIT_TEXT_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace oa::text {

/// Folds UTF-8 text for comparison: ASCII is lowercased, Latin-1 Supplement
/// and Latin Extended-A letters are mapped to their unaccented lowercase ASCII
/// base (expanding ligatures: ae, oe, ss, th, ij). Code points outside those
/// blocks pass through unchanged; they act as separators downstream.
std::string fold(std::string_view utf8);

/// Splits into folded tokens on every non-alphanumeric character. Token
/// position equals its index in the returned vector.
std::vector<std::string> tokenize(std::string_view utf8);

/// Comparison key for titles: fold, drop full stops, collapse whitespace runs
/// to a single space, trim. Empty input (or all-separator input) yields an
/// empty key, which callers treat as unmatchable.
std::string normalize_title(std::string_view title);

/// Levenshtein distance over bytes (inputs are expected to be folded keys, so
/// bytes and characters coincide).
std::size_t edit_distance(std::string_view a, std::string_view b);

/// 1 - distance/max(len); both empty compares as 0 (empty keys never match).
double similarity(std::string_view a, std::string_view b);

bool is_token_char(char c);

} // namespace oa::text

#endif
