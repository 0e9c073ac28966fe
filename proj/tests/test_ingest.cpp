#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "oaaudit/errors.hpp"
#include "oaaudit/ingest.hpp"

using namespace oa;
using ingest::ExportFormat;
using ingest::ParseOptions;
using ingest::PublishedRecord;

namespace {

ParseOptions window(int from, int to, const std::string& label = "test") {
    ParseOptions opt;
    opt.year_from = from;
    opt.year_to = to;
    opt.source_label = label;
    return opt;
}

std::vector<PublishedRecord> parse_tagged_str(const std::string& body, Diagnostics& diag,
                                              int from = 2012, int to = 2014) {
    std::istringstream in(body);
    return ingest::parse_export(in, ExportFormat::Tagged, window(from, to), diag);
}

std::vector<PublishedRecord> parse_delim_str(const std::string& body, Diagnostics& diag,
                                             int from = 2012, int to = 2014) {
    std::istringstream in(body);
    return ingest::parse_export(in, ExportFormat::Delimited, window(from, to), diag);
}

} // namespace

TEST_CASE("tagged export fills every modeled field") {
    Diagnostics diag;
    auto recs = parse_tagged_str(
        "FN Export\nVR 1.0\n"
        "UT WOS:000001\n"
        "TI A very long title that continues\n"
        "   on the next line\n"
        "PY 2013\n"
        "SO Journal of Samples\n"
        "SN 1234-5678\n"
        "DI https://doi.org/10.1234/Abc.5\n"
        "DT Article\n"
        "OG University of Somewhere\n"
        "AD Univ Somewhere, Dept One, Spain\n"
        "AD Univ Elsewhere, Dept Two, France\n"
        "FO MINECO\n"
        "FG CSO2012-1 | CSO2012-2\n"
        "FT Supported by grant CSO2012-1.\n"
        "ER\nEF\n",
        diag);
    REQUIRE(recs.size() == 1);
    const PublishedRecord& r = recs[0];
    CHECK(r.uid == "WOS:000001");
    CHECK(r.title == "A very long title that continues on the next line");
    CHECK(r.year == 2013);
    CHECK(r.journal_title == "Journal of Samples");
    REQUIRE(r.issn.has_value());
    CHECK(*r.issn == "1234-5678");
    REQUIRE(r.doi.has_value());
    CHECK(*r.doi == "10.1234/abc.5"); // canonical form
    CHECK(r.doc_type == "Article");
    CHECK(r.org_field == "University of Somewhere");
    CHECK(r.address_field == "Univ Somewhere, Dept One, Spain; Univ Elsewhere, Dept Two, France");
    CHECK(r.funding_agency == "MINECO");
    CHECK(r.funding_text == "Supported by grant CSO2012-1.");
    CHECK(diag.empty());
}

TEST_CASE("records lacking a title, year, or window membership are skipped") {
    Diagnostics diag;
    auto recs = parse_tagged_str(
        "UT A\nPY 2013\nSO J\nER\n"             // no title
        "UT B\nTI Ok b\nPY 13\nSO J\nER\n"      // malformed year
        "UT C\nTI Ok c\nPY 2011\nSO J\nER\n"    // outside window
        "UT D\nTI Ok d\nPY 2012\nSO J\nER\nEF\n",
        diag);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].uid == "D");
    CHECK(diag.get("ingest.missing_title") == 1);
    CHECK(diag.get("ingest.bad_year") == 1);
    CHECK(diag.get("ingest.year_outside_window") == 1);
    CHECK(diag.get("ingest.skipped_records") == 3);
}

TEST_CASE("uid falls back to source label and record ordinal") {
    Diagnostics diag;
    auto recs = parse_tagged_str(
        "TI No uid here\nPY 2012\nER\n"
        "UT X\nTI Skipped\nPY bad\nER\n"
        "TI Also no uid\nPY 2012\nER\nEF\n",
        diag);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].uid == "test:1");
    CHECK(recs[1].uid == "test:3"); // the skipped record still consumed ordinal 2
}

TEST_CASE("a truncated final record is still attempted") {
    Diagnostics diag;
    auto recs = parse_tagged_str("UT T1\nTI Cut off\nPY 2012\n", diag);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].uid == "T1");
}

TEST_CASE("content after the file terminator is ignored") {
    Diagnostics diag;
    auto recs = parse_tagged_str(
        "UT A\nTI First\nPY 2012\nER\nEF\nUT B\nTI Second\nPY 2012\nER\n", diag);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].uid == "A");
}

TEST_CASE("stray non tag lines are tallied, a garbage first line is fatal") {
    Diagnostics diag;
    auto recs = parse_tagged_str(
        "UT A\nTI Fine\n@@ stray\nPY 2012\nER\nEF\n", diag);
    REQUIRE(recs.size() == 1);
    CHECK(diag.get("ingest.unrecognized_lines") == 1);

    Diagnostics diag2;
    bool threw = false;
    try {
        parse_tagged_str("garbage first line\nUT A\n", diag2);
    } catch (const ConfigError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("unrecognized export format at line 1") !=
              std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("sniffing distinguishes tag lines from delimited headers") {
    std::istringstream tagged("\n\nFN Export\nUT A\n");
    CHECK(ingest::sniff_format(tagged) == ExportFormat::Tagged);
    std::string first;
    std::getline(tagged, first); // the stream was rewound
    CHECK(first.empty());

    std::istringstream delim("UT,TI,PY\nx,y,2012\n");
    CHECK(ingest::sniff_format(delim) == ExportFormat::Delimited);

    std::istringstream spelled("Accession Number\tArticle Title\n");
    CHECK(ingest::sniff_format(spelled) == ExportFormat::Delimited);

    std::istringstream empty("");
    CHECK(ingest::sniff_format(empty) == ExportFormat::Tagged);
}

TEST_CASE("delimited exports accept tag codes or spelled out headers") {
    Diagnostics diag;
    auto recs = parse_delim_str(
        "Accession Number,Article Title,Publication Year,Source Title,ISSN,DOI,Document Type,"
        "Organizations,Addresses,Funding Agency,Grant Numbers,Funding Text\n"
        "\"W:1\",\"Quoted, with comma\",\"2012\",\"J One\",\"1111-2222\",\"10.1/a\",\"Article\","
        "\"Org A\",\"Addr A, Spain\",\"MINECO\",\"G-1\",\"Thanks\"\n"
        "W:2,Bare cells work too,2013,J Two,,,Article,Org B,Addr B,,,\n",
        diag);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].uid == "W:1");
    CHECK(recs[0].title == "Quoted, with comma");
    CHECK(recs[0].year == 2012);
    REQUIRE(recs[0].doi.has_value());
    CHECK(*recs[0].doi == "10.1/a");
    CHECK(recs[1].uid == "W:2");
    CHECK_FALSE(recs[1].doi.has_value());
    CHECK_FALSE(recs[1].issn.has_value());
}

TEST_CASE("delimited quoting handles escaped quotes and embedded tabs") {
    Diagnostics diag;
    auto recs = parse_delim_str(
        "UT\tTI\tPY\n"
        "A\t\"Title with \"\"quotes\"\" inside\"\t2012\n",
        diag);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].title == "Title with \"quotes\" inside");
}

TEST_CASE("a header with no usable column is a configuration error") {
    Diagnostics diag;
    CHECK_THROWS_AS(parse_delim_str("alpha,beta\n1,2\n", diag), ConfigError);
}

TEST_CASE("delimited rows missing mandatory values are tallied and skipped") {
    Diagnostics diag;
    auto recs = parse_delim_str(
        "UT,TI,PY\n"
        "A,,2012\n"
        "B,Ok,\n"
        "C,Fine,2013\n",
        diag);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].uid == "C");
    CHECK(diag.get("ingest.missing_title") == 1);
    CHECK(diag.get("ingest.bad_year") == 1);
    CHECK(diag.get("ingest.skipped_records") == 2);
}

TEST_CASE("term lists skip blanks and comments") {
    std::istringstream in("# header\n\nMINECO\n  Instituto Carlos III  \n# tail\n");
    ingest::TermList list = ingest::load_terms(in);
    REQUIRE(list.terms.size() == 2);
    CHECK(list.terms[0] == "MINECO");
    CHECK(list.terms[1] == "Instituto Carlos III");
}

TEST_CASE("the built in national funder list is the expected set") {
    const ingest::TermList& terms = ingest::default_government_terms();
    CHECK(terms.terms.size() == 27);
    auto has = [&terms](const char* t) {
        for (const auto& s : terms.terms)
            if (s == t) return true;
        return false;
    };
    CHECK(has("MINECO"));
    CHECK(has("MICINN"));
    CHECK(has("MINCINN")); // historic misspelling kept deliberately
    CHECK(has("Ministry of Economy and Competitiveness"));
    CHECK(has("Instituto de Salud Carlos III"));
}

TEST_CASE("single word terms only match whole tokens") {
    const ingest::TermList& terms = ingest::default_government_terms();
    PublishedRecord rec;

    rec.funding_text = "The mechanism was studied in detail"; // MEC inside a word
    CHECK_FALSE(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_text = "analysis of biofilms and fissures"; // FIS inside words
    CHECK_FALSE(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_text = "supported by the MEC";
    CHECK(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_text = "hispanic studies programme"; // Spain inside a word? no token
    CHECK_FALSE(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_text = "funded in Spain";
    CHECK(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_text = "grant from malmequer consortium"; // no term at all
    CHECK_FALSE(ingest::classify_funding(rec, terms).government_funded);
}

TEST_CASE("multi word terms require consecutive tokens") {
    const ingest::TermList& terms = ingest::default_government_terms();
    PublishedRecord rec;

    rec.funding_agency = "Ministry of Education";
    CHECK(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_agency = "Ministry of Higher Education"; // interrupted
    CHECK_FALSE(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_agency = "Education Ministry of France"; // wrong order
    CHECK_FALSE(ingest::classify_funding(rec, terms).government_funded);

    rec.funding_agency = "Carlos III Health Institute (Madrid)";
    CHECK(ingest::classify_funding(rec, terms).government_funded);
}

TEST_CASE("folding makes funding matches case and accent insensitive") {
    const ingest::TermList& terms = ingest::default_government_terms();
    PublishedRecord rec;
    rec.funding_agency = "ministerio de economía";
    CHECK(ingest::classify_funding(rec, terms).government_funded);
    rec.funding_agency = "Gobierno de España";
    CHECK(ingest::classify_funding(rec, terms).government_funded);
}

TEST_CASE("match evidence is ordered by field then term and deduplicated") {
    const ingest::TermList& terms = ingest::default_government_terms();
    PublishedRecord rec;
    rec.funding_agency = "MINECO and CSIC joint call";
    rec.grant_numbers = "MINECO-2012-1";
    rec.funding_text = "MINECO MINECO MINECO"; // dedup within field
    ingest::FundingEvidence ev = ingest::classify_funding(rec, terms);
    REQUIRE(ev.matches.size() == 4);
    CHECK(ev.matches[0] == std::pair<std::string, std::string>("FO", "CSIC"));
    CHECK(ev.matches[1] == std::pair<std::string, std::string>("FO", "MINECO"));
    CHECK(ev.matches[2] == std::pair<std::string, std::string>("FG", "MINECO"));
    CHECK(ev.matches[3] == std::pair<std::string, std::string>("FT", "MINECO"));
}

TEST_CASE("batch funding classification is order preserving and jobs independent") {
    const ingest::TermList& terms = ingest::default_government_terms();
    std::mt19937 rng(5150);
    std::vector<PublishedRecord> recs(400);
    const char* kSnippets[] = {
        "MINECO grant", "Wellcome Trust", "Ministry of Education support",
        "no funding", "Instituto de Salud Carlos III", "ERC starting grant",
        "Espana nationwide survey", "mechanism fissure biofilm",
    };
    for (auto& r : recs) {
        r.funding_agency = kSnippets[rng() % 8];
        r.funding_text = kSnippets[rng() % 8];
    }
    auto serial = ingest::classify_funding_batch(recs, terms, 1);
    auto parallel = ingest::classify_funding_batch(recs, terms, 4);
    REQUIRE(serial.size() == recs.size());
    REQUIRE(parallel.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(serial[i].government_funded == parallel[i].government_funded);
        CHECK(serial[i].matches == parallel[i].matches);
        CHECK(serial[i].government_funded ==
              ingest::classify_funding(recs[i], terms).government_funded);
    }
}

TEST_CASE("the bundled institution profiles load with sane fields") {
    std::ifstream in(std::string(OA_REPO_ROOT) + "/data/institutions.conf");
    REQUIRE(in.good());
    auto profiles = ingest::load_profiles(in);
    REQUIRE(profiles.size() == 28);
    std::set<std::string> acronyms, targets;
    for (const auto& p : profiles) {
        CAPTURE(p.acronym);
        CHECK_FALSE(p.display_name.empty());
        CHECK_FALSE(p.organization.empty());
        CHECK_FALSE(p.repo_target.empty());
        CHECK(p.policy_ref == p.acronym); // no overrides in the bundled set
        CHECK(p.match_mode == ingest::MatchMode::OrgOrAddress);
        CHECK(p.address_expression != nullptr);
        acronyms.insert(p.acronym);
        targets.insert(p.repo_target);
    }
    CHECK(acronyms.size() == 28);
    CHECK(targets.size() == 28);
    CHECK(acronyms.count("UC3M") == 1);
    CHECK(acronyms.count("EHU") == 1);
}

TEST_CASE("profile files reject structural mistakes") {
    auto load = [](const std::string& body) {
        std::istringstream in(body);
        return ingest::load_profiles(in);
    };
    CHECK_THROWS_AS(load("key = value\n"), ConfigError); // key before any section
    CHECK_THROWS_AS(load("[A]\nnot a key value line\n"), ConfigError);
    CHECK_THROWS_AS(load("[A]\nunknown = x\n"), ConfigError);
    CHECK_THROWS_AS(load("[A]\nmatch = sideways\n"), ConfigError);
    CHECK_THROWS_AS(load("[A]\naddress_expression = (unbalanced\nmatch = org_or_address\n"),
                    ConfigError);
    CHECK_THROWS_AS(load("[A]\naddress_expression = x\n[A]\naddress_expression = x\n"),
                    ConfigError); // duplicate acronym
    CHECK_THROWS_AS(load("[A]\nmatch = address_only\n"), ConfigError); // needs an expression
    // org_only needs no expression
    auto ok = load("[A]\norganization = Some Org\nmatch = org_only\n");
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].policy_ref == "A");
}

TEST_CASE("institution attribution uses organization containment or the address query") {
    std::istringstream in(
        "[X]\n"
        "name = Example University\n"
        "organization = University of Examples\n"
        "target = ftexample\n"
        "address_expression = \"Univ* Example*\" OR UX\n"
        "match = org_or_address\n");
    auto profiles = ingest::load_profiles(in);
    REQUIRE(profiles.size() == 1);
    const auto& profile = profiles[0];

    auto rec = [](const char* org, const char* addr) {
        PublishedRecord r;
        r.uid = "u";
        r.title = "t";
        r.year = 2012;
        r.org_field = org;
        r.address_field = addr;
        return r;
    };
    std::vector<PublishedRecord> recs = {
        rec("University of Examples", "Nowhere"),                  // org hit
        rec("THE UNIVERSITY OF EXAMPLES FOUNDATION", "Nowhere"),   // org inside longer field
        rec("University of Example", "Nowhere"),                   // not the whole phrase
        rec("", "Univ Examples, Dept Q, Spain"),                   // address hit
        rec("", "Sample City UX, Spain"),                          // acronym hit
        rec("", "Univ Sample, Spain"),                             // miss
    };
    auto kept = ingest::filter_by_institution(recs, profile);
    REQUIRE(kept.size() == 4);

    ingest::InstitutionProfile org_only = profile;
    org_only.match_mode = ingest::MatchMode::OrgOnly;
    CHECK(ingest::filter_by_institution(recs, org_only).size() == 2);

    ingest::InstitutionProfile addr_only = profile;
    addr_only.match_mode = ingest::MatchMode::AddressOnly;
    CHECK(ingest::filter_by_institution(recs, addr_only).size() == 2);
}

TEST_CASE("bundled profiles do not claim each other's organization fields") {
    std::ifstream in(std::string(OA_REPO_ROOT) + "/data/institutions.conf");
    REQUIRE(in.good());
    auto profiles = ingest::load_profiles(in);
    for (const auto& owner : profiles) {
        PublishedRecord r;
        r.uid = "u";
        r.title = "t";
        r.year = 2012;
        r.org_field = owner.organization;
        std::vector<PublishedRecord> one = {r};
        for (const auto& other : profiles) {
            bool kept = !ingest::filter_by_institution(one, other).empty();
            CAPTURE(owner.acronym);
            CAPTURE(other.acronym);
            CHECK(kept == (owner.acronym == other.acronym));
        }
    }
}
