#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oaaudit/ingest.hpp"
#include "oaaudit/query_expr.hpp"
#include "oaaudit/text.hpp"
#include "support/corpus.hpp"
#include "support/query_oracle.hpp"

using namespace oa;
using query::Expr;
using query::ExprPtr;

namespace {

struct Case {
    const char* expr;
    const char* field;
    bool expected;
};

const Case kCases[] = {
    // single words, folding, wildcards
    {"Madrid", "Univ Politecn Madrid, Spain", true},
    {"Madrid", "Universidad Autonoma", false},
    {"madrid", "MADRID ES", true},
    {"Cataluña", "cataluna", true},
    {"Catalu?a", "Cataluña", true},
    {"Cat*", "Cataluna Inst", true},
    {"Cat*", "Cartagena", false},
    {"C?t", "cat", true},
    {"C?t", "cart", false},
    {"Uni*", "Univ", true},
    {"Univ*", "Univ", true},
    {"*", "anything", true},
    {"UC3M", "Leganes UC3M Madrid", true},
    {"III", "Univ Carlos III", true},
    // bare adjacency is AND over the whole field; quotes demand a run
    {"Univ Barcelona", "Univ Autonoma Barcelona", true},
    {"\"Univ Barcelona\"", "Univ Autonoma Barcelona", false},
    {"\"Univ Barcelona\"", "Univ Barcelona, Spain", true},
    {"Nac* Distan*", "Univ Nacl Educ Distancia Madrid", true},
    {"\"Univ* Auto* Barcelona\"", "Univ Autonoma Barcelona Bellaterra", true},
    {"\"Univ* Auto* Barcelona\"", "Autonoma Univ Barcelona", false},
    {"\"Las Palmas Gran Canaria Univ*\"", "Las Palmas Gran Canaria University", true},
    {"\"Card?nal Herrera\"", "CEU Cardenal Herrera Univ", true},
    // punctuation inside one word also forms a run
    {"UPV/EHU", "Univ Basque Country UPV/EHU Bilbao", true},
    {"UPV/EHU", "UPV Valencia EHU", false},
    {"UCH-CEU", "Fac Med UCH-CEU Moncada", true},
    // OR / AND combinations
    {"A OR B", "b c", true},
    {"A OR B", "c d", false},
    {"A B OR C", "a x", false},
    {"A B OR C", "c", true},
    {"A B OR C", "b a", true},
    {"(A OR B) C", "b c", true},
    {"(A OR B) C", "a x", false},
    {"((A))", "a", true},
    // negation
    {"(NOT Kyoto)", "Osaka Univ", true},
    {"(NOT Kyoto)", "Kyoto Univ", false},
    {"UJI (NOT Kyoto)", "UJI Grp Kyoto Japan", false},
    {"UJI (NOT Kyoto)", "UJI Castellon Spain", true},
    {"x (NOT (A OR B))", "x q", true},
    {"x (NOT (A OR B))", "x a", false},
    // proximity: adjacent tokens are 1 apart, overlap is 0
    {"(UOC NEAR/1 Spain)", "UOC, Spain", true},
    {"(UOC NEAR/1 Spain)", "UOC Barcelona Spain", false},
    {"(A NEAR/2 B)", "a x b", true},
    {"(A NEAR/2 B)", "a x y b", false},
    {"(A NEAR/2 B)", "b x a", true},
    {"(\"a b\" NEAR/1 c)", "a b c", true},
    {"(\"a b\" NEAR/0 c)", "a b c", false},
    {"(\"a b\" NEAR/0 b)", "a b", true},
    {"(A NEAR/1 (B OR C))", "c a", true},
    // a pure negation carries no position, so proximity can never hold
    {"(A NEAR/3 (NOT B))", "a x", false},
    {"((NOT B) NEAR/3 A)", "a x", false},
};

ExprPtr random_expr(std::mt19937& rng, int depth) {
    auto token = [&rng] {
        static const char* kTokens[] = {"a", "b", "c", "d", "a*", "b?", "?", "*", "c*d"};
        return std::string(kTokens[rng() % 9]);
    };
    if (depth <= 0 || rng() % 4 == 0) {
        std::vector<std::string> toks;
        std::size_t n = 1 + rng() % 2;
        for (std::size_t i = 0; i < n; ++i) toks.push_back(token());
        return Expr::make_phrase(std::move(toks));
    }
    switch (rng() % 4) {
        case 0:
            return Expr::make_binary(Expr::Kind::And, random_expr(rng, depth - 1),
                                     random_expr(rng, depth - 1));
        case 1:
            return Expr::make_binary(Expr::Kind::Or, random_expr(rng, depth - 1),
                                     random_expr(rng, depth - 1));
        case 2:
            return Expr::make_not(random_expr(rng, depth - 1));
        default:
            return Expr::make_near(random_expr(rng, depth - 1), random_expr(rng, depth - 1),
                                   static_cast<int>(rng() % 4));
    }
}

std::string random_field(std::mt19937& rng) {
    static const char* kWords[] = {"a", "b", "c", "d", "ab", "cd", "ax"};
    std::string field;
    std::size_t n = rng() % 9;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) field += ' ';
        field += kWords[rng() % 7];
    }
    return field;
}

std::vector<ingest::InstitutionProfile> load_repo_profiles() {
    std::ifstream in(std::string(OA_REPO_ROOT) + "/data/institutions.conf");
    REQUIRE(in.good());
    return ingest::load_profiles(in);
}

} // namespace

TEST_CASE("curated expressions agree with the engine and the regex oracle") {
    for (const Case& c : kCases) {
        CAPTURE(c.expr);
        CAPTURE(c.field);
        ExprPtr e = query::parse(c.expr);
        CHECK(query::evaluate(*e, c.field) == c.expected);
        CHECK(testsupport::oracle_eval(*e, c.field) == c.expected);
    }
}

TEST_CASE("curated expressions survive a render and reparse") {
    for (const Case& c : kCases) {
        CAPTURE(c.expr);
        ExprPtr e = query::parse(c.expr);
        std::string rendered = query::to_string(*e);
        ExprPtr again = query::parse(rendered);
        CHECK(query::to_string(*again) == rendered);
        CHECK(query::evaluate(*again, c.field) == c.expected);
    }
}

TEST_CASE("wildcard matching agrees with a regex translation") {
    CHECK(query::wildcard_match("al?cant*", "alicante"));
    CHECK(query::wildcard_match("Compluten*", "complutense"));
    CHECK_FALSE(query::wildcard_match("cat*", "cartagena"));
    CHECK(query::wildcard_match("ñ", "n")); // pattern folds too

    std::mt19937 rng(991);
    auto make = [&rng](bool pattern) {
        std::string s;
        std::size_t n = rng() % 7;
        for (std::size_t i = 0; i < n; ++i) {
            int r = static_cast<int>(rng() % (pattern ? 5 : 3));
            if (pattern && r == 3) s += '*';
            else if (pattern && r == 4) s += '?';
            else s += static_cast<char>('a' + r);
        }
        return s;
    };
    for (int round = 0; round < 3000; ++round) {
        std::string pat = make(true), tok = make(false);
        CAPTURE(pat);
        CAPTURE(tok);
        CHECK(query::wildcard_match(pat, tok) == testsupport::oracle_wildcard(pat, tok));
    }
}

TEST_CASE("random expression trees evaluate like the oracle and round-trip") {
    std::mt19937 rng(20240229);
    for (int round = 0; round < 1500; ++round) {
        ExprPtr e = random_expr(rng, 3);
        std::string rendered = query::to_string(*e);
        CAPTURE(rendered);
        ExprPtr reparsed = query::parse(rendered);
        for (int f = 0; f < 4; ++f) {
            std::string field = random_field(rng);
            CAPTURE(field);
            bool got = query::evaluate(*e, field);
            CHECK(got == testsupport::oracle_eval(*e, field));
            CHECK(got == query::evaluate(*reparsed, field));
        }
    }
}

TEST_CASE("parse failures carry the byte offset of the offender") {
    auto offset_of = [](const char* src) -> std::size_t {
        try {
            query::parse(src);
        } catch (const QueryParseError& e) {
            return e.offset();
        }
        std::string message = std::string("expected a parse error for: ") + src;
        FAIL(message);
        return SIZE_MAX;
    };
    CHECK(offset_of("A OR") == 4);
    CHECK(offset_of("(A") == 0);
    CHECK(offset_of(")") == 0);
    CHECK(offset_of("A)") == 1);
    CHECK(offset_of("\"abc") == 0);
    CHECK(offset_of("\"\"") == 0);
    CHECK(offset_of("NOT A") == 0);
    CHECK(offset_of("A NEAR/2 B") == 2);
    CHECK(offset_of("(A NEAR B)") == 3);
    CHECK(offset_of("(A NEAR/x B)") == 3);
    CHECK(offset_of("(A NEAR/1234567 B)") == 3);
    CHECK(offset_of("()") == 1);
    CHECK(offset_of("!!!") == 0);
    CHECK(offset_of("OR A") == 0);
}

TEST_CASE("every configured address expression parses and self-identifies") {
    std::vector<ingest::InstitutionProfile> profiles = load_repo_profiles();
    REQUIRE(profiles.size() == 28);
    for (const auto& p : profiles) {
        CAPTURE(p.acronym);
        REQUIRE(p.address_expression != nullptr);
        std::string own = testsupport::fixture_address(p.acronym);
        CHECK(query::evaluate(*p.address_expression, own));
        CHECK(testsupport::oracle_eval(*p.address_expression, own));
        // Rendering round-trips.
        std::string rendered = query::to_string(*p.address_expression);
        CHECK(query::to_string(*query::parse(rendered)) == rendered);
    }
}

TEST_CASE("no configured expression claims another institution's address") {
    std::vector<ingest::InstitutionProfile> profiles = load_repo_profiles();
    for (const auto& p : profiles) {
        for (const auto& q : profiles) {
            if (p.acronym == q.acronym) continue;
            std::string address = testsupport::fixture_address(q.acronym);
            CAPTURE(p.acronym);
            CAPTURE(address);
            CHECK_FALSE(query::evaluate(*p.address_expression, address));
        }
    }
}

TEST_CASE("negation guards keep foreign lookalikes out") {
    std::vector<ingest::InstitutionProfile> profiles = load_repo_profiles();
    const Expr* uji = nullptr;
    const Expr* upm = nullptr;
    for (const auto& p : profiles) {
        if (p.acronym == "UJI") uji = p.address_expression.get();
        if (p.acronym == "UPM") upm = p.address_expression.get();
    }
    REQUIRE(uji != nullptr);
    REQUIRE(upm != nullptr);
    CHECK_FALSE(query::evaluate(*uji, "Kyoto Univ, UJI Grp, Kyoto, Japan"));
    CHECK(query::evaluate(*uji, "Univ Jaume I, Castellon, Spain"));
    CHECK_FALSE(query::evaluate(*upm, "Univ Putra Malaysia, UPM Serdang, Malaysia"));
    CHECK(query::evaluate(*upm, "UPM, Madrid, Spain"));
}
