#ifndef OAAUDIT_HARVEST_HPP
#define OAAUDIT_HARVEST_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oaaudit/diagnostics.hpp"

namespace oa::harvest {

struct HarvestRequest {
    std::string target;         // repository internal name, e.g. "ftunivalicante"
    int year_from = 0;
    int year_to = 0;
    std::string doc_type_code = "121"; // journal articles
    std::vector<std::string> fields = default_fields();
    std::optional<int> page_size;      // "hits"; omitted → service default

    static std::vector<std::string> default_fields();
};

struct RepoRecord {
    std::string uid; // <target>#<offset+slot>, assigned at page parse
    std::string source_target;
    std::string title;
    std::vector<std::string> creators;
    std::vector<std::string> contributors;
    std::optional<int> year;            // from dc:date, first plausible 4-digit year
    std::vector<std::string> identifiers; // URI/URL/DOI candidates, possibly repeated
    std::vector<std::string> relations;
    std::vector<std::string> rights_raw; // may be empty: no rights information
    std::string doc_type_raw;
};

struct HarvestPage {
    std::vector<RepoRecord> records;
    long offset = 0;
    long total_reported = 0;
};

/// Renders the parameter string: func, target, dcyear range + doctype, hits
/// when a page size is set, then the comma-joined field list.
std::string build_query(const HarvestRequest& req);

/// Parses one result document. Titleless records are quarantined and tallied
/// under "harvest.quarantined_titleless". Malformed markup throws (the caller
/// decides whether the page is skippable).
HarvestPage parse_page(std::string_view document, std::string_view target,
                       Diagnostics& diag);

/// Record list of parse_page, for callers that ignore pagination.
std::vector<RepoRecord> parse_dc(std::string_view document, std::string_view target,
                                 Diagnostics& diag);

/// Inverse of parse_page over modeled fields; used for fixtures and the
/// round-trip suite.
std::string serialize_page(const HarvestPage& page);

struct EndpointConfig {
    std::string endpoint;   // "http(s)://host[:port]/path" or a fixture directory
    int max_retries = 3;    // additional attempts after the first
    int backoff_ms = 100;   // multiplied by the attempt number
    int parallelism = 2;    // concurrent page fetches after page 0
};

/// Fetches every page for the request, in offset order. Page 0 determines
/// total_reported; later offsets advance by page_size (or by records seen when
/// no page size is set, in which case fetching is sequential). Transient
/// failures are retried ("harvest.retries"); a malformed page is skipped and
/// tallied ("harvest.pages_skipped") when the offset chain can continue.
/// Duplicate records (shared identifier) across pages are collapsed and
/// tallied ("harvest.duplicates_collapsed").
std::vector<HarvestPage> fetch_all(const EndpointConfig& endpoint, const HarvestRequest& req,
                                   Diagnostics& diag);

/// Keeps journal articles published inside the window. Records with no year
/// are quarantined ("harvest.quarantined_yearless"); non-article types are
/// dropped silently ("harvest.non_articles").
std::vector<RepoRecord> filter_articles(std::vector<RepoRecord> records, int year_from,
                                        int year_to, Diagnostics& diag);

} // namespace oa::harvest

#endif
