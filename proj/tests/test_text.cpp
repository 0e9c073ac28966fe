#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oaaudit/text.hpp"

using namespace oa;

namespace {

// Naive recursive Levenshtein, memoized; the independent yardstick for the
// rolling-array implementation.
std::size_t slow_edit(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> memo(a.size() + 1,
                                               std::vector<std::size_t>(b.size() + 1, SIZE_MAX));
    auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> std::size_t {
        if (i == a.size()) return b.size() - j;
        if (j == b.size()) return a.size() - i;
        std::size_t& slot = memo[i][j];
        if (slot != SIZE_MAX) return slot;
        std::size_t best = self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
        best = std::min(best, self(self, i + 1, j) + 1);
        best = std::min(best, self(self, i, j + 1) + 1);
        return slot = best;
    };
    return rec(rec, 0, 0);
}

} // namespace

TEST_CASE("fold lowercases ascii and strips latin accents") {
    CHECK(text::fold("ESPAÑA") == "espana");
    CHECK(text::fold("Cataluña") == "cataluna");
    CHECK(text::fold("Müller") == "muller");
    CHECK(text::fold("Ámbito Jurídico") == "ambito juridico");
    CHECK(text::fold("Łódź") == "lodz");
    CHECK(text::fold("œdème Æon ß Þing ĳs") == "oedeme aeon ss thing ijs");
    CHECK(text::fold("plain ascii 123") == "plain ascii 123");
}

TEST_CASE("fold passes non latin code points through") {
    // Downstream tokenization treats them as separators.
    std::string folded = text::fold("α-helix 日本");
    CHECK(folded.find("helix") != std::string::npos);
    CHECK(text::tokenize("α-helix") == std::vector<std::string>{"helix"});
}

TEST_CASE("tokenize splits on every non alphanumeric byte") {
    CHECK(text::tokenize("Univ. Politécn, Cataluña") ==
          std::vector<std::string>{"univ", "politecn", "cataluna"});
    CHECK(text::tokenize("UPV/EHU") == std::vector<std::string>{"upv", "ehu"});
    CHECK(text::tokenize("  ") == std::vector<std::string>{});
    CHECK(text::tokenize("a1b2") == std::vector<std::string>{"a1b2"});
    CHECK(text::tokenize("10.5000/x.1") == std::vector<std::string>{"10", "5000", "x", "1"});
}

TEST_CASE("token positions are vector indices") {
    std::vector<std::string> toks = text::tokenize("Univ Carlos III Madrid");
    REQUIRE(toks.size() == 4);
    CHECK(toks[1] == "carlos");
    CHECK(toks[2] == "iii");
}

TEST_CASE("normalize_title folds, drops periods, collapses whitespace") {
    CHECK(text::normalize_title("A. B. Smith") == "a b smith");
    CHECK(text::normalize_title("  The   Title.\n") == "the title");
    CHECK(text::normalize_title("Ecología: una visión") == "ecologia: una vision");
    CHECK(text::normalize_title("...") == "");
    CHECK(text::normalize_title("") == "");
    CHECK(text::normalize_title("one\ttwo\r\nthree") == "one two three");
}

TEST_CASE("normalize_title is idempotent") {
    const char* samples[] = {"Self-Archiving in Spain.", "  mixed   CASE  ", "Ñandú ..."};
    for (const char* s : samples) {
        std::string once = text::normalize_title(s);
        CHECK(text::normalize_title(once) == once);
    }
}

TEST_CASE("edit_distance handles the classic cases") {
    CHECK(text::edit_distance("", "") == 0);
    CHECK(text::edit_distance("abc", "") == 3);
    CHECK(text::edit_distance("kitten", "sitting") == 3);
    CHECK(text::edit_distance("flaw", "lawn") == 2);
    CHECK(text::edit_distance("same", "same") == 0);
}

TEST_CASE("edit_distance equals the memoized recursion on random strings") {
    std::mt19937 rng(20231117);
    for (int round = 0; round < 300; ++round) {
        auto make = [&rng] {
            std::string s;
            std::size_t n = rng() % 12;
            for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('a' + rng() % 4);
            return s;
        };
        std::string a = make(), b = make();
        CHECK(text::edit_distance(a, b) == slow_edit(a, b));
    }
}

TEST_CASE("edit_distance is a metric on random triples") {
    std::mt19937 rng(42);
    auto make = [&rng] {
        std::string s;
        std::size_t n = 1 + rng() % 10;
        for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('a' + rng() % 3);
        return s;
    };
    for (int round = 0; round < 200; ++round) {
        std::string a = make(), b = make(), c = make();
        std::size_t ab = text::edit_distance(a, b);
        std::size_t ba = text::edit_distance(b, a);
        CHECK(ab == ba);
        CHECK((ab == 0) == (a == b));
        CHECK(ab <= text::edit_distance(a, c) + text::edit_distance(c, b));
    }
}

TEST_CASE("similarity is 1 minus normalized distance, 0 for two empties") {
    CHECK(text::similarity("", "") == 0.0);
    CHECK(text::similarity("abcd", "abcd") == 1.0);
    CHECK(text::similarity("abcd", "abce") == doctest::Approx(0.75));
    CHECK(text::similarity("", "xy") == doctest::Approx(0.0));
}

TEST_CASE("similarity stays within [0, 1]") {
    std::mt19937 rng(7);
    for (int round = 0; round < 200; ++round) {
        std::string a, b;
        for (std::size_t i = rng() % 8; i--;) a += static_cast<char>('a' + rng() % 26);
        for (std::size_t i = rng() % 8; i--;) b += static_cast<char>('a' + rng() % 26);
        double s = text::similarity(a, b);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }
}
