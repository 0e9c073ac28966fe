#include "oaaudit/query_expr.hpp"

#include <cctype>

#include "oaaudit/text.hpp"

namespace oa::query {

namespace {

bool is_pattern_char(char c) {
    return text::is_token_char(c) || c == '*' || c == '?';
}

// Splits an already-folded word or quoted phrase into wildcard tokens.
std::vector<std::string> split_pattern(std::string_view raw) {
    std::string folded = text::fold(raw);
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < folded.size()) {
        if (!is_pattern_char(folded[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < folded.size() && is_pattern_char(folded[i])) ++i;
        tokens.emplace_back(folded.substr(start, i - start));
    }
    return tokens;
}

bool glob_match(std::string_view pattern, std::string_view s) {
    std::size_t pi = 0, si = 0;
    std::size_t star_p = std::string_view::npos, star_s = 0;
    while (si < s.size()) {
        if (pi < pattern.size() && (pattern[pi] == '?' || pattern[pi] == s[si])) {
            ++pi;
            ++si;
        } else if (pi < pattern.size() && pattern[pi] == '*') {
            star_p = pi++;
            star_s = si;
        } else if (star_p != std::string_view::npos) {
            pi = star_p + 1;
            si = ++star_s;
        } else {
            return false;
        }
    }
    while (pi < pattern.size() && pattern[pi] == '*') ++pi;
    return pi == pattern.size();
}

struct Token {
    enum class Type { Word, PhraseText, LParen, RParen, Or, Not, Near, End };
    Type type;
    std::string text;
    int near_distance = 0;
    std::size_t offset = 0;
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(') {
            out.push_back({Token::Type::LParen, "(", 0, i});
            ++i;
            continue;
        }
        if (c == ')') {
            out.push_back({Token::Type::RParen, ")", 0, i});
            ++i;
            continue;
        }
        if (c == '"') {
            std::size_t close = src.find('"', i + 1);
            if (close == std::string_view::npos)
                throw QueryParseError("unterminated quoted phrase", i);
            out.push_back({Token::Type::PhraseText,
                           std::string(src.substr(i + 1, close - i - 1)), 0, i});
            i = close + 1;
            continue;
        }
        std::size_t start = i;
        while (i < src.size() && !std::isspace(static_cast<unsigned char>(src[i])) &&
               src[i] != '(' && src[i] != ')' && src[i] != '"')
            ++i;
        std::string word(src.substr(start, i - start));
        if (word == "OR") {
            out.push_back({Token::Type::Or, word, 0, start});
        } else if (word == "NOT") {
            out.push_back({Token::Type::Not, word, 0, start});
        } else if (word == "NEAR" || word.rfind("NEAR/", 0) == 0) {
            std::string digits = word.size() > 5 ? word.substr(5) : "";
            bool ok = !digits.empty() && digits.size() <= 6;
            for (char d : digits) ok = ok && std::isdigit(static_cast<unsigned char>(d));
            if (!ok) throw QueryParseError("malformed NEAR operator", start);
            out.push_back({Token::Type::Near, word, std::stoi(digits), start});
        } else {
            out.push_back({Token::Type::Word, word, 0, start});
        }
    }
    out.push_back({Token::Type::End, "", 0, src.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ExprPtr run() {
        ExprPtr e = parse_expr();
        const Token& t = peek();
        if (t.type == Token::Type::RParen)
            throw QueryParseError("unmatched ')'", t.offset);
        if (t.type == Token::Type::Near)
            throw QueryParseError("NEAR is only valid inside parentheses", t.offset);
        if (t.type != Token::Type::End)
            throw QueryParseError("unexpected token '" + t.text + "'", t.offset);
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& take() { return toks_[pos_++]; }

    static bool starts_factor(Token::Type t) {
        return t == Token::Type::Word || t == Token::Type::PhraseText ||
               t == Token::Type::LParen;
    }

    ExprPtr parse_expr() {
        ExprPtr left = parse_term();
        while (peek().type == Token::Type::Or) {
            take();
            ExprPtr right = parse_term();
            left = Expr::make_binary(Expr::Kind::Or, std::move(left), std::move(right));
        }
        return left;
    }

    ExprPtr parse_term() {
        if (peek().type == Token::Type::Not)
            throw QueryParseError("NOT is only valid inside parentheses", peek().offset);
        if (!starts_factor(peek().type))
            throw QueryParseError("expected a term", peek().offset);
        ExprPtr left = parse_factor();
        while (starts_factor(peek().type)) {
            ExprPtr right = parse_factor();
            left = Expr::make_binary(Expr::Kind::And, std::move(left), std::move(right));
        }
        return left;
    }

    ExprPtr parse_factor() {
        const Token& t = take();
        if (t.type == Token::Type::Word || t.type == Token::Type::PhraseText) {
            std::vector<std::string> tokens = split_pattern(t.text);
            if (tokens.empty())
                throw QueryParseError(t.type == Token::Type::Word
                                          ? "term has no searchable characters"
                                          : "empty phrase",
                                      t.offset);
            return Expr::make_phrase(std::move(tokens));
        }
        // '(' NOT expr ')' | '(' expr [NEAR/n expr] ')'
        if (peek().type == Token::Type::Not) {
            take();
            ExprPtr inner = parse_expr();
            expect_rparen(t.offset);
            return Expr::make_not(std::move(inner));
        }
        ExprPtr e = parse_expr();
        if (peek().type == Token::Type::Near) {
            int dist = take().near_distance;
            ExprPtr right = parse_expr();
            expect_rparen(t.offset);
            return Expr::make_near(std::move(e), std::move(right), dist);
        }
        expect_rparen(t.offset);
        return e;
    }

    void expect_rparen(std::size_t open_offset) {
        if (peek().type != Token::Type::RParen) {
            const Token& t = peek();
            if (t.type == Token::Type::End)
                throw QueryParseError("unmatched '('", open_offset);
            throw QueryParseError("expected ')'", t.offset);
        }
        take();
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

struct Span {
    std::size_t start, end; // inclusive token positions
};

std::size_t span_gap(const Span& a, const Span& b) {
    if (a.start <= b.end && b.start <= a.end) return 0; // overlap
    if (a.end < b.start) return b.start - a.end;
    return a.start - b.end;
}

void merge_spans(std::vector<Span>* dst, std::vector<Span>&& extra) {
    if (!dst) return;
    dst->insert(dst->end(), extra.begin(), extra.end());
}

// Evaluates a node; when spans is non-null it receives every occurrence span
// (empty for negations, which have no position).
bool eval_node(const Expr& e, std::span<const std::string> toks, std::vector<Span>* spans) {
    switch (e.kind) {
        case Expr::Kind::Phrase: {
            const std::size_t k = e.phrase.size();
            bool matched = false;
            if (k == 0 || k > toks.size()) return false;
            for (std::size_t s = 0; s + k <= toks.size(); ++s) {
                bool all = true;
                for (std::size_t j = 0; j < k && all; ++j)
                    all = glob_match(e.phrase[j], toks[s + j]);
                if (all) {
                    matched = true;
                    if (spans)
                        spans->push_back({s, s + k - 1});
                    else
                        break;
                }
            }
            return matched;
        }
        case Expr::Kind::And: {
            std::vector<Span> ls, rs;
            bool l = eval_node(*e.left, toks, spans ? &ls : nullptr);
            if (!l && !spans) return false;
            bool r = eval_node(*e.right, toks, spans ? &rs : nullptr);
            if (l && r) {
                merge_spans(spans, std::move(ls));
                merge_spans(spans, std::move(rs));
                return true;
            }
            return false;
        }
        case Expr::Kind::Or: {
            std::vector<Span> ls, rs;
            bool l = eval_node(*e.left, toks, spans ? &ls : nullptr);
            if (l && !spans) return true;
            bool r = eval_node(*e.right, toks, spans ? &rs : nullptr);
            if (l) merge_spans(spans, std::move(ls));
            if (r) merge_spans(spans, std::move(rs));
            return l || r;
        }
        case Expr::Kind::Not:
            return !eval_node(*e.left, toks, nullptr);
        case Expr::Kind::Near: {
            std::vector<Span> ls, rs;
            bool l = eval_node(*e.left, toks, &ls);
            bool r = eval_node(*e.right, toks, &rs);
            if (!l || !r) return false;
            bool close_enough = false;
            for (const Span& a : ls)
                for (const Span& b : rs)
                    if (span_gap(a, b) <= static_cast<std::size_t>(e.near_distance))
                        close_enough = true;
            if (close_enough) {
                merge_spans(spans, std::move(ls));
                merge_spans(spans, std::move(rs));
            }
            return close_enough;
        }
    }
    return false;
}

std::string render(const Expr& e, Expr::Kind parent);

std::string render_quoted(const Expr& e) {
    std::string out = "\"";
    for (std::size_t i = 0; i < e.phrase.size(); ++i) {
        if (i) out += ' ';
        out += e.phrase[i];
    }
    out += '"';
    return out;
}

std::string render(const Expr& e, Expr::Kind parent) {
    switch (e.kind) {
        case Expr::Kind::Phrase:
            return render_quoted(e);
        case Expr::Kind::And:
            return render(*e.left, Expr::Kind::And) + " " + render(*e.right, Expr::Kind::And);
        case Expr::Kind::Or: {
            std::string s =
                render(*e.left, Expr::Kind::Or) + " OR " + render(*e.right, Expr::Kind::Or);
            if (parent == Expr::Kind::And) return "(" + s + ")";
            return s;
        }
        case Expr::Kind::Not:
            return "(NOT " + render(*e.left, Expr::Kind::Or) + ")";
        case Expr::Kind::Near:
            return "(" + render(*e.left, Expr::Kind::Or) + " NEAR/" +
                   std::to_string(e.near_distance) + " " +
                   render(*e.right, Expr::Kind::Or) + ")";
    }
    return {};
}

} // namespace

ExprPtr Expr::make_phrase(std::vector<std::string> tokens) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Phrase;
    e->phrase = std::move(tokens);
    return e;
}

ExprPtr Expr::make_binary(Kind k, ExprPtr l, ExprPtr r) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->left = std::move(l);
    e->right = std::move(r);
    return e;
}

ExprPtr Expr::make_not(ExprPtr inner) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Not;
    e->left = std::move(inner);
    return e;
}

ExprPtr Expr::make_near(ExprPtr l, ExprPtr r, int distance) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Near;
    e->left = std::move(l);
    e->right = std::move(r);
    e->near_distance = distance;
    return e;
}

ExprPtr parse(std::string_view source) {
    Parser p(lex(source));
    return p.run();
}

bool wildcard_match(std::string_view pattern, std::string_view token) {
    return glob_match(text::fold(pattern), text::fold(token));
}

bool evaluate(const Expr& expr, std::string_view field) {
    std::vector<std::string> toks = text::tokenize(field);
    return evaluate(expr, toks);
}

bool evaluate(const Expr& expr, std::span<const std::string> tokens) {
    return eval_node(expr, tokens, nullptr);
}

std::string to_string(const Expr& expr) {
    return render(expr, Expr::Kind::Or);
}

} // namespace oa::query
