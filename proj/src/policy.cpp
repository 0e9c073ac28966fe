#include "oaaudit/policy.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>

#include "oaaudit/errors.hpp"
#include "oaaudit/text.hpp"

namespace oa::policy {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

// ISSNs compare with hyphens removed and check digit uppercased.
std::string normalize_issn(std::string_view issn) {
    std::string out;
    for (char c : issn) {
        if (c == '-' || std::isspace(static_cast<unsigned char>(c))) continue;
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

std::optional<RomeoColor> color_from_string(std::string_view s) {
    std::string f = text::fold(trim(s));
    if (f == "green") return RomeoColor::Green;
    if (f == "blue") return RomeoColor::Blue;
    if (f == "yellow") return RomeoColor::Yellow;
    if (f == "white") return RomeoColor::White;
    return std::nullopt;
}

std::optional<AccessKind> kind_from_rights(const std::string& folded) {
    auto ends_with = [&folded](std::string_view suffix) {
        return folded.size() >= suffix.size() &&
               folded.compare(folded.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with("openaccess")) return AccessKind::Open;
    if (ends_with("embargoedaccess")) return AccessKind::Embargoed;
    if (ends_with("closedaccess")) return AccessKind::Closed;
    if (ends_with("restrictedaccess")) return AccessKind::Closed;
    return std::nullopt;
}

// "...embargoEnd/2016-01-31" or any folded value carrying "embargoend"
// followed by a date.
std::optional<Date> embargo_end_from_rights(const std::string& folded) {
    std::size_t pos = folded.find("embargoend");
    if (pos == std::string::npos) return std::nullopt;
    std::size_t start = folded.find_first_of("0123456789", pos);
    if (start == std::string::npos) return std::nullopt;
    return Date::parse(std::string_view(folded).substr(start));
}

} // namespace

std::optional<Date> Date::parse(std::string_view iso) {
    // Accepts YYYY-MM-DD; trailing content ignored after a full match.
    if (iso.size() < 10) return std::nullopt;
    auto digit = [&iso](std::size_t i) {
        return std::isdigit(static_cast<unsigned char>(iso[i]));
    };
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!digit(i)) return std::nullopt;
    if (iso[4] != '-' || iso[7] != '-') return std::nullopt;
    Date d;
    d.year = (iso[0] - '0') * 1000 + (iso[1] - '0') * 100 + (iso[2] - '0') * 10 + (iso[3] - '0');
    d.month = (iso[5] - '0') * 10 + (iso[6] - '0');
    d.day = (iso[8] - '0') * 10 + (iso[9] - '0');
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
    return d;
}

std::string Date::to_string() const {
    char buf[11];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

const char* to_string(AccessKind k) {
    switch (k) {
        case AccessKind::Open: return "open";
        case AccessKind::Embargoed: return "embargoed";
        case AccessKind::Closed: return "closed";
        case AccessKind::Unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(RomeoColor c) {
    switch (c) {
        case RomeoColor::Green: return "green";
        case RomeoColor::Blue: return "blue";
        case RomeoColor::Yellow: return "yellow";
        case RomeoColor::White: return "white";
        case RomeoColor::Unclassified: return "unclassified";
    }
    return "unclassified";
}

AccessStatus classify_rights(const harvest::RepoRecord& record, const Date& audit_date,
                             Diagnostics* diag) {
    AccessStatus status;
    std::optional<Date> expiry;
    std::vector<AccessKind> seen;
    for (const std::string& raw : record.rights_raw) {
        std::string folded = text::fold(trim(raw));
        while (!folded.empty() && folded.back() == '/') folded.pop_back();
        if (folded.empty()) continue;
        if (auto end = embargo_end_from_rights(folded)) {
            expiry = end;
            continue;
        }
        if (auto kind = kind_from_rights(folded)) {
            seen.push_back(*kind);
            if (rank(*kind) > rank(status.kind)) status.kind = *kind;
        } else if (diag) {
            diag->count("rights.unrecognized_values");
        }
    }
    for (AccessKind k : seen) {
        if (k != seen.front()) {
            if (diag) diag->count("rights.conflicts");
            break;
        }
    }
    if (status.kind == AccessKind::Embargoed && expiry) {
        status.embargo_expiry = expiry;
        if (diag && *expiry < audit_date) diag->count("rights.embargo_expired");
    }
    return status;
}

std::optional<GrantRelation> parse_grant_relation(std::string_view relation) {
    std::string r = trim(relation);
    static constexpr std::string_view kPrefix = "info:eu-repo/grantagreement/";
    std::string folded_head = text::fold(r.substr(0, kPrefix.size()));
    if (folded_head != kPrefix) return std::nullopt;
    std::string rest = r.substr(kPrefix.size());
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (parts.size() < 2) {
        std::size_t slash = rest.find('/', start);
        if (slash == std::string::npos) break;
        parts.push_back(rest.substr(start, slash - start));
        start = slash + 1;
    }
    parts.push_back(rest.substr(start)); // project id may itself contain '/'
    if (parts.size() != 3) return std::nullopt;
    for (const std::string& p : parts)
        if (trim(p).empty()) return std::nullopt;
    GrantRelation g;
    g.funder = trim(parts[0]);
    g.program = trim(parts[1]);
    g.project_id = trim(parts[2]);
    g.raw = r;
    return g;
}

void RomeoSnapshot::add(const std::optional<std::string>& issn,
                        std::string_view journal_title, RomeoColor color) {
    bool keyed = false;
    if (issn && !issn->empty()) {
        std::string key = normalize_issn(*issn);
        auto [it, inserted] = by_issn_.emplace(key, color);
        if (!inserted && it->second != color)
            throw ConfigError("snapshot: conflicting colors for ISSN " + *issn);
        keyed = true;
    }
    std::string title_key = text::normalize_title(journal_title);
    if (!title_key.empty()) {
        auto [it, inserted] = by_title_key_.emplace(title_key, color);
        if (!inserted && it->second != color)
            throw ConfigError("snapshot: conflicting colors for journal '" +
                              std::string(journal_title) + "'");
        keyed = true;
    }
    if (!keyed) throw ConfigError("snapshot entry with neither ISSN nor title");
    ++entries_;
}

RomeoSnapshot RomeoSnapshot::load(std::istream& in) {
    RomeoSnapshot snap;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            static constexpr std::string_view kDateKey = "# snapshot-date:";
            if (t.rfind(kDateKey, 0) == 0) snap.snapshot_date_ = trim(t.substr(kDateKey.size()));
            continue;
        }
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (std::size_t tab = line.find('\t'); tab != std::string::npos;
             tab = line.find('\t', start)) {
            cols.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        cols.push_back(line.substr(start));
        if (cols.size() != 3)
            throw ConfigError("snapshot line " + std::to_string(lineno) +
                              ": expected issn<TAB>journal<TAB>color");
        std::optional<RomeoColor> color = color_from_string(cols[2]);
        if (!color)
            throw ConfigError("snapshot line " + std::to_string(lineno) + ": unknown color '" +
                              trim(cols[2]) + "'");
        std::string issn = trim(cols[0]);
        snap.add(issn.empty() ? std::nullopt : std::make_optional(issn), trim(cols[1]), *color);
    }
    return snap;
}

RomeoColor RomeoSnapshot::lookup(std::string_view journal_title,
                                 const std::optional<std::string>& issn) const {
    if (issn && !issn->empty()) {
        auto it = by_issn_.find(normalize_issn(*issn));
        if (it != by_issn_.end()) return it->second;
    }
    std::string key = text::normalize_title(journal_title);
    if (!key.empty()) {
        auto it = by_title_key_.find(key);
        if (it != by_title_key_.end()) return it->second;
    }
    return RomeoColor::Unclassified;
}

PolicyRegistry PolicyRegistry::load(std::istream& in) {
    PolicyRegistry reg;
    PolicyProfile cur;
    bool open = false;
    std::string line;
    std::size_t lineno = 0;

    auto flush = [&reg, &cur, &open] {
        if (!open) return;
        if (cur.acronym.empty()) throw ConfigError("policy profile without acronym");
        if (cur.stance == PolicyStance::None && cur.shieber_suber_type)
            throw ConfigError("policy " + cur.acronym + ": type set without a stance");
        if (!reg.index_.emplace(cur.acronym, reg.profiles_.size()).second)
            throw ConfigError("duplicate policy acronym: " + cur.acronym);
        reg.profiles_.push_back(cur);
    };

    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            flush();
            cur = PolicyProfile{};
            cur.acronym = trim(t.substr(1, t.size() - 2));
            open = true;
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos || !open)
            throw ConfigError("bad policy line " + std::to_string(lineno) + ": " + t);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "stance") {
            if (value == "mandate") cur.stance = PolicyStance::Mandate;
            else if (value == "recommend") cur.stance = PolicyStance::Recommend;
            else if (value == "none") cur.stance = PolicyStance::None;
            else throw ConfigError("policy " + cur.acronym + ": unknown stance " + value);
        } else if (key == "type") {
            if (!all_digits(value) || value.size() > 1 || value[0] < '1' || value[0] > '6')
                throw ConfigError("policy " + cur.acronym + ": invalid type code " + value);
            cur.shieber_suber_type = value[0] - '0';
        } else if (key == "effective") {
            auto d = Date::parse(value);
            if (!d) throw ConfigError("policy " + cur.acronym + ": bad date " + value);
            cur.effective_date = d;
        } else if (key == "embargo_months") {
            if (value == "publisher") {
                cur.embargo.publisher_stipulated = true;
            } else if (all_digits(value) && value.size() <= 3) {
                cur.embargo.months = std::stoi(value);
            } else {
                throw ConfigError("policy " + cur.acronym + ": bad embargo " + value);
            }
        } else if (key == "opt_out") {
            if (value == "none") cur.opt_out = DepositOptOut::None;
            else if (value == "immediate_oa_only") cur.opt_out = DepositOptOut::ImmediateOaOnly;
            else if (value == "full") cur.opt_out = DepositOptOut::Full;
            else throw ConfigError("policy " + cur.acronym + ": unknown opt_out " + value);
        } else if (key == "versions") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                std::string v = trim(item);
                if (v == "submitted") cur.versions_accepted.insert(PaperVersion::Submitted);
                else if (v == "accepted") cur.versions_accepted.insert(PaperVersion::Accepted);
                else if (v == "published") cur.versions_accepted.insert(PaperVersion::Published);
                else if (v == "unspecified")
                    cur.versions_accepted.insert(PaperVersion::Unspecified);
                else throw ConfigError("policy " + cur.acronym + ": unknown version " + v);
            }
        } else {
            throw ConfigError("policy " + cur.acronym + ": unknown key " + key);
        }
    }
    flush();
    return reg;
}

const PolicyProfile& PolicyRegistry::at(const std::string& acronym) const {
    const PolicyProfile* p = find(acronym);
    if (!p) throw ConfigError("no policy registered for acronym " + acronym);
    return *p;
}

const PolicyProfile* PolicyRegistry::find(const std::string& acronym) const {
    auto it = index_.find(acronym);
    return it == index_.end() ? nullptr : &profiles_[it->second];
}

} // namespace oa::policy
