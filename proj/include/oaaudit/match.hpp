#ifndef OAAUDIT_MATCH_HPP
#define OAAUDIT_MATCH_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oaaudit/diagnostics.hpp"
#include "oaaudit/harvest.hpp"
#include "oaaudit/ingest.hpp"

namespace oa::match {

/// Lowercases, strips resolver prefixes ("https://doi.org/", "doi:", ...) and
/// surrounding whitespace; anything not starting with the "10." directory
/// indicator afterwards is not treated as a DOI.
std::optional<std::string> canonical_doi(std::string_view raw);

/// First canonical DOI found among a deposit's identifiers.
std::optional<std::string> deposit_doi(const harvest::RepoRecord& record);

enum class MatchBasis { None, Doi, Title };

struct MatchOutcome {
    std::string published_uid;
    std::optional<std::string> deposit_uid; // absent iff basis == None
    MatchBasis basis = MatchBasis::None;
    bool year_checked = false; // some deposit shared the DOI or title key
};

struct ReviewCandidate {
    std::string published_uid;
    std::string deposit_uid;
    std::string published_key; // normalized titles
    std::string deposit_key;
    double similarity = 0.0;
};

/// Collapses duplicates inside one repository: records sharing a canonical
/// DOI, or the same (normalized title, year), reduce to one survivor: the
/// most open by rights, then the more populated, then the earliest in input
/// order. Inputs must all carry the same source_target.
std::vector<harvest::RepoRecord> dedup_within_institution(
    std::vector<harvest::RepoRecord> records, Diagnostics* diag = nullptr);

/// Links each published record to at most one deposit: canonical-DOI equality
/// first, then normalized-title equality, both requiring equal years. Each
/// deposit is claimed at most once, in published order. Deposits must already
/// be deduplicated. jobs > 1 parallelizes the candidate scan; the claiming
/// pass is sequential, so results equal the single-threaded ones.
std::vector<MatchOutcome> link(std::span<const ingest::PublishedRecord> published,
                               std::span<const harvest::RepoRecord> deposits, int jobs = 1);

/// Near-miss pairs (similarity ≥ threshold, < 1) for manual review, sorted by
/// normalized published title, then similarity descending, then deposit uid.
std::vector<ReviewCandidate> review_queue(
    std::span<const ingest::PublishedRecord> published_unmatched,
    std::span<const harvest::RepoRecord> deposits_unlinked, double threshold, int jobs = 1);

} // namespace oa::match

#endif
