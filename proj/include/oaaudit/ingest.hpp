#ifndef OAAUDIT_INGEST_HPP
#define OAAUDIT_INGEST_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oaaudit/diagnostics.hpp"
#include "oaaudit/query_expr.hpp"

namespace oa::ingest {

/// One published, peer-reviewed item from a citation-database export.
struct PublishedRecord {
    std::string uid; // accession id when present, else <source>:<ordinal>
    std::string title;
    std::string journal_title;
    std::string doc_type;
    std::string org_field;     // OG, affiliation
    std::string address_field; // AD
    std::string funding_agency; // FO
    std::string grant_numbers;  // FG
    std::string funding_text;   // FT
    std::optional<std::string> doi; // canonical form, see match::canonical_doi
    std::optional<std::string> issn;
    int year = 0;
};

enum class ExportFormat { Tagged, Delimited };

struct ParseOptions {
    int year_from = 0;
    int year_to = 9999;
    std::string source_label; // used for fallback uids
};

/// Parses one export stream. Records missing a title or a plausible year, or
/// outside the configured window, are skipped and tallied under
/// "ingest.skipped_records" (with per-reason categories alongside).
std::vector<PublishedRecord> parse_export(std::istream& in, ExportFormat format,
                                          const ParseOptions& options, Diagnostics& diag);

/// Peeks at the first non-empty line: a two-letter tag introduces the tagged
/// format, otherwise the stream is treated as header-plus-rows delimited.
ExportFormat sniff_format(std::istream& in);

/// Government-funder term list. Single words must match a whole token; multi
/// word entries must match consecutively. Matching is case- and diacritic-
/// insensitive, same folding as the query language (but without wildcards).
struct TermList {
    std::vector<std::string> terms;
};

/// One term per line; blank lines and lines starting with '#' are ignored.
TermList load_terms(std::istream& in);

/// The default Spanish national-funder list used when no file is configured.
const TermList& default_government_terms();

struct FundingEvidence {
    bool government_funded = false;
    // (field label, matched term), ordered by field then term, deduplicated.
    std::vector<std::pair<std::string, std::string>> matches;
};

/// Scans funding agency, grant numbers, and funding text for the term list.
FundingEvidence classify_funding(const PublishedRecord& record, const TermList& terms);

/// Batch variant; parallelized when jobs > 1, output order equals input order.
std::vector<FundingEvidence> classify_funding_batch(std::span<const PublishedRecord> records,
                                                    const TermList& terms, int jobs);

/// How a profile attributes records to the institution.
enum class MatchMode { OrgOrAddress, OrgOnly, AddressOnly };

struct InstitutionProfile {
    std::string acronym;
    std::string display_name;
    std::string organization; // phrase matched against the affiliation field
    std::string repo_target;  // harvest target handle
    std::string policy_ref;   // acronym key into the policy registry
    std::string address_expression_source;
    query::ExprPtr address_expression; // parsed once at load
    MatchMode match_mode = MatchMode::OrgOrAddress;
};

/// Sectioned key=value config, one [ACRONYM] section per institution.
/// Expressions are parsed eagerly; a malformed one fails the whole load.
std::vector<InstitutionProfile> load_profiles(std::istream& in);

/// Keeps records attributable to the institution. Stable, idempotent.
std::vector<PublishedRecord> filter_by_institution(std::span<const PublishedRecord> records,
                                                   const InstitutionProfile& profile);

} // namespace oa::ingest

#endif
