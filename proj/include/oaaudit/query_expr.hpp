#ifndef OAAUDIT_QUERY_EXPR_HPP
#define OAAUDIT_QUERY_EXPR_HPP

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oaaudit/errors.hpp"

namespace oa::query {

/// Boolean address-field query language.
///
/// Grammar, loosest binding first:
///   expr   := term (OR term)*
///   term   := factor+                      adjacency is AND
///   factor := phrase | word | "(" NOT expr ")" | "(" expr [NEAR/n expr] ")"
///
/// Words and quoted phrases are split on non-alphanumerics into wildcard
/// tokens ("*" = any run incl. empty, "?" = exactly one character) and each
/// token must match a whole field token, case- and diacritic-insensitively.
/// NOT only occurs parenthesized and binds as and-not to the term it follows.
/// NEAR/n only occurs parenthesized; it holds when both sides match and the
/// nearest pair of occurrence spans lies within n positions (adjacent = 1).

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
public:
    enum class Kind { Phrase, And, Or, Not, Near };

    Kind kind;
    std::vector<std::string> phrase; // folded wildcard tokens; Kind::Phrase
    ExprPtr left, right;             // right unused by Not
    int near_distance = 0;           // Kind::Near

    static ExprPtr make_phrase(std::vector<std::string> tokens);
    static ExprPtr make_binary(Kind k, ExprPtr l, ExprPtr r);
    static ExprPtr make_not(ExprPtr inner);
    static ExprPtr make_near(ExprPtr l, ExprPtr r, int distance);
};

/// Throws QueryParseError (with byte offset) on malformed input: unbalanced
/// parentheses or quotes, empty phrases, dangling operators, NEAR outside
/// parentheses.
ExprPtr parse(std::string_view source);

/// True when the folded pattern matches the whole folded token.
bool wildcard_match(std::string_view pattern, std::string_view token);

/// Evaluates against a raw field; tokenization matches text::tokenize.
bool evaluate(const Expr& expr, std::string_view field);

/// Evaluates against pre-folded tokens (position = index).
bool evaluate(const Expr& expr, std::span<const std::string> tokens);

/// Round-trippable rendering, used for config echo and error reporting.
std::string to_string(const Expr& expr);

} // namespace oa::query

#endif
