#ifndef OAAUDIT_METRICS_HPP
#define OAAUDIT_METRICS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "oaaudit/match.hpp"
#include "oaaudit/policy.hpp"

namespace oa::metrics {

struct StatusCounts {
    long open = 0, embargoed = 0, closed = 0, unknown = 0;
    long deposited() const { return open + embargoed + closed + unknown; }
    long compliant() const { return open + embargoed; }
};

struct ColorCounts {
    long green = 0, blue = 0, yellow = 0, white = 0, unclassified = 0;
    long total() const { return green + blue + yellow + white + unclassified; }
};

/// Exact tallies for one institution and one year (or the whole window).
/// Status counts cover matched records only; color counts cover every
/// published record. The _gov variants restrict to government-funded records.
struct InstitutionYearCounts {
    std::string acronym;
    std::string year_label; // "2013", or "2012-2014" for the window row
    long wos_total = 0;
    long wos_gov = 0;
    StatusCounts by_status, by_status_gov;
    ColorCounts by_color, by_color_gov;
    long deposited() const { return by_status.deposited(); }
    long deposited_gov() const { return by_status_gov.deposited(); }
};

struct PaiPercentages {
    std::optional<double> green, blue, yellow, white, unclassified;
};

/// Unrounded percentages; absent value = undefined (zero denominator), which
/// is distinct from 0.0 and must be skipped, not averaged, downstream.
struct Indices {
    std::optional<double> deposit_inst_pct, deposit_gov_pct;
    std::optional<double> ici_pct, gci_pct;
    PaiPercentages pai, pai_gov;
    std::optional<double> potential_oa_pct, potential_oa_gov_pct;
    std::optional<double> gap_inst_pct, gap_gov_pct;
    std::vector<std::string> anomalies;
};

/// Aggregates outcomes against the classification maps (deposit uid → access
/// status; published uid → funded flag / color). A uid absent from its map is
/// an integrity error.
InstitutionYearCounts tally(
    std::span<const match::MatchOutcome> outcomes,
    const std::unordered_map<std::string, policy::AccessStatus>& deposit_status,
    const std::unordered_map<std::string, bool>& funded,
    const std::unordered_map<std::string, policy::RomeoColor>& colors,
    const std::string& acronym, const std::string& year_label);

/// 100 × compliant(open+embargoed) / wos_total; absent when wos_total == 0.
std::optional<double> ici(const InstitutionYearCounts& c);

/// The government-funded counterpart, over wos_gov.
std::optional<double> gci(const InstitutionYearCounts& c);

std::optional<double> deposit_ratio(const InstitutionYearCounts& c, bool gov_only);

PaiPercentages pai(const InstitutionYearCounts& c, bool gov_only);

/// Green + blue shares: the self-archiving potential.
std::optional<double> potential_oa(const PaiPercentages& p);

/// potential − real; negative gaps are legal but flagged by compute_indices.
std::optional<double> gap(std::optional<double> real, std::optional<double> potential);

Indices compute_indices(const InstitutionYearCounts& c);

/// One decimal, half away from zero (the table convention).
double round1(double v);

/// "NA" when undefined; fixed one-decimal when rounded, shortest repr raw.
std::string format_pct(const std::optional<double>& v, bool rounded);

struct ReportEntry {
    InstitutionYearCounts counts;
    Indices indices;
};

struct ComplianceReport {
    int year_from = 0, year_to = 0;
    std::string romeo_snapshot_date;
    std::string audit_date; // empty when not configured
    std::vector<ReportEntry> entries; // acronym asc, years asc, window row last
    std::map<std::string, std::uint64_t> diagnostics;
};

/// Tab-separated table; stable column set, one row per entry. Rounded
/// percentage columns are followed by full-precision *_raw columns.
void emit_delimited(const ComplianceReport& report, std::ostream& out);

/// Category/count pairs, sorted by category.
void emit_diagnostics(const std::map<std::string, std::uint64_t>& diagnostics,
                      std::ostream& out);

/// JSON document carrying the full report, round-trippable.
void emit_structured(const ComplianceReport& report, std::ostream& out);

ComplianceReport read_structured(std::istream& in);

} // namespace oa::metrics

#endif
