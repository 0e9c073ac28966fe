#ifndef OAAUDIT_POLICY_HPP
#define OAAUDIT_POLICY_HPP

#include <compare>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oaaudit/diagnostics.hpp"
#include "oaaudit/harvest.hpp"

namespace oa::policy {

struct Date {
    int year = 0, month = 0, day = 0;
    auto operator<=>(const Date&) const = default;

    static std::optional<Date> parse(std::string_view iso); // YYYY-MM-DD
    std::string to_string() const;
};

enum class AccessKind { Unknown = 0, Closed = 1, Embargoed = 2, Open = 3 };

/// Openness rank; the total order used by dedup survivor selection.
inline int rank(AccessKind k) { return static_cast<int>(k); }

const char* to_string(AccessKind k);

struct AccessStatus {
    AccessKind kind = AccessKind::Unknown;
    std::optional<Date> embargo_expiry; // only for Embargoed, informational
};

/// Maps dc:rights values onto the info:eu-repo access vocabulary by suffix
/// (openAccess / embargoedAccess / closedAccess / restrictedAccess, the last
/// counting as Closed). Empty or unrecognized values give Unknown. Multiple
/// recognized values resolve to the most open; every conflict is tallied
/// ("rights.conflicts"). An embargo end date in a companion value is attached;
/// expiry past audit_date is informational only ("rights.embargo_expired").
AccessStatus classify_rights(const harvest::RepoRecord& record, const Date& audit_date,
                             Diagnostics* diag = nullptr);

struct GrantRelation {
    std::string funder;
    std::string program;
    std::string project_id;
    std::string raw;
};

/// Splits "info:eu-repo/grantAgreement/Funder/Program/ProjectID". Free-text
/// acknowledgments return nullopt; callers keep the raw string either way.
std::optional<GrantRelation> parse_grant_relation(std::string_view relation);

enum class RomeoColor { Green, Blue, Yellow, White, Unclassified };

const char* to_string(RomeoColor c);

/// Journal self-archiving colors pinned to a dated snapshot file. Lookups by
/// ISSN take precedence over normalized-title lookups; a journal absent from
/// both maps is Unclassified.
class RomeoSnapshot {
public:
    /// Delimited file: issn<TAB>journal_title<TAB>color. '#' comments; a
    /// "# snapshot-date: YYYY-MM-DD" comment is recorded as provenance.
    /// Conflicting duplicate keys fail the load.
    static RomeoSnapshot load(std::istream& in);

    RomeoColor lookup(std::string_view journal_title,
                      const std::optional<std::string>& issn) const;

    const std::string& snapshot_date() const { return snapshot_date_; }
    std::size_t size() const { return entries_; }

    void add(const std::optional<std::string>& issn, std::string_view journal_title,
             RomeoColor color); // also used by fixture builders

private:
    std::unordered_map<std::string, RomeoColor> by_issn_;
    std::unordered_map<std::string, RomeoColor> by_title_key_;
    std::string snapshot_date_;
    std::size_t entries_ = 0;
};

enum class PolicyStance { None, Recommend, Mandate };
enum class DepositOptOut { None, ImmediateOaOnly, Full };
enum class PaperVersion { Submitted, Accepted, Published, Unspecified };

struct EmbargoAllowance {
    std::optional<int> months;        // cap in months when the policy names one
    bool publisher_stipulated = false; // "set by the publisher" marker
};

struct PolicyProfile {
    std::string acronym;
    PolicyStance stance = PolicyStance::None;
    std::optional<int> shieber_suber_type; // 1..6
    std::optional<Date> effective_date;
    EmbargoAllowance embargo;
    DepositOptOut opt_out = DepositOptOut::None;
    std::set<PaperVersion> versions_accepted;
};

class PolicyRegistry {
public:
    /// Sectioned key=value config, one [ACRONYM] section per institution.
    /// Duplicate acronyms and invalid type codes fail the load.
    static PolicyRegistry load(std::istream& in);

    const PolicyProfile& at(const std::string& acronym) const; // throws on unknown
    const PolicyProfile* find(const std::string& acronym) const;
    const std::vector<PolicyProfile>& profiles() const { return profiles_; }

private:
    std::vector<PolicyProfile> profiles_;
    std::map<std::string, std::size_t> index_;
};

} // namespace oa::policy

#endif
