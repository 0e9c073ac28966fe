#include "oaaudit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <set>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "oaaudit/errors.hpp"
#include "oaaudit/match.hpp"
#include "oaaudit/text.hpp"

namespace oa::ingest {

namespace {

std::string strip_cr(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool is_tag_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// A tagged-export line either opens a field ("TI Some title", tag of two
// uppercase letters/digits) or continues the previous one (leading blanks).
bool is_tag_line(const std::string& line) {
    return line.size() >= 2 && is_tag_char(line[0]) && is_tag_char(line[1]) &&
           (line.size() == 2 || line[2] == ' ');
}

std::optional<int> parse_year(std::string_view s) {
    std::string t = trim(s);
    if (t.size() != 4) return std::nullopt;
    int y = 0;
    for (char c : t) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        y = y * 10 + (c - '0');
    }
    return y;
}

struct RawRecord {
    std::map<std::string, std::vector<std::string>> fields;
    bool empty() const { return fields.empty(); }
};

std::string joined(const RawRecord& r, const std::string& tag, const char* sep = " ") {
    auto it = r.fields.find(tag);
    if (it == r.fields.end()) return {};
    std::string out;
    for (const std::string& v : it->second) {
        if (!out.empty()) out += sep;
        out += v;
    }
    return out;
}

// Validates and converts one raw record; nullopt means skipped (tallied by
// the caller).
std::optional<PublishedRecord> finish_record(const RawRecord& raw, const ParseOptions& opt,
                                             std::size_t ordinal, Diagnostics& diag) {
    PublishedRecord rec;
    rec.title = trim(joined(raw, "TI"));
    if (rec.title.empty()) {
        diag.count("ingest.missing_title");
        return std::nullopt;
    }
    std::optional<int> year = parse_year(joined(raw, "PY"));
    if (!year) {
        diag.count("ingest.bad_year");
        return std::nullopt;
    }
    if (*year < opt.year_from || *year > opt.year_to) {
        diag.count("ingest.year_outside_window");
        return std::nullopt;
    }
    rec.year = *year;
    rec.uid = trim(joined(raw, "UT"));
    if (rec.uid.empty())
        rec.uid = opt.source_label + ":" + std::to_string(ordinal);
    rec.journal_title = trim(joined(raw, "SO"));
    rec.doc_type = trim(joined(raw, "DT"));
    rec.org_field = joined(raw, "OG", "; ");
    rec.address_field = joined(raw, "AD", "; ");
    rec.funding_agency = joined(raw, "FO", "; ");
    rec.grant_numbers = joined(raw, "FG", "; ");
    rec.funding_text = joined(raw, "FT");
    if (std::string d = joined(raw, "DI"); !d.empty()) rec.doi = match::canonical_doi(d);
    if (std::string sn = trim(joined(raw, "SN")); !sn.empty()) rec.issn = sn;
    return rec;
}

std::vector<PublishedRecord> parse_tagged(std::istream& in, const ParseOptions& opt,
                                          Diagnostics& diag) {
    std::vector<PublishedRecord> out;
    RawRecord raw;
    std::string line, current_tag;
    std::size_t ordinal = 0, lineno = 0;
    bool saw_any_tag = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (is_tag_line(line)) {
            saw_any_tag = true;
            std::string tag = line.substr(0, 2);
            std::string value = line.size() > 3 ? line.substr(3) : "";
            if (tag == "ER") {
                ++ordinal;
                if (!raw.empty()) {
                    if (auto rec = finish_record(raw, opt, ordinal, diag)) out.push_back(*rec);
                    else diag.count("ingest.skipped_records");
                }
                raw = RawRecord{};
                current_tag.clear();
                continue;
            }
            if (tag == "EF") break;
            if (tag == "FN" || tag == "VR") continue; // file header
            current_tag = tag;
            raw.fields[tag].push_back(value);
            continue;
        }
        if (!line.empty() && line[0] == ' ' && !current_tag.empty()) {
            raw.fields[current_tag].push_back(trim(line));
            continue;
        }
        if (!saw_any_tag)
            throw ConfigError("unrecognized export format at line " +
                              std::to_string(lineno) + ": " + line);
        diag.count("ingest.unrecognized_lines");
    }
    if (!raw.empty()) {
        // Truncated final record (no terminator): still attempted.
        ++ordinal;
        if (auto rec = finish_record(raw, opt, ordinal, diag)) out.push_back(*rec);
        else diag.count("ingest.skipped_records");
    }
    return out;
}

std::vector<std::string> split_delimited_row(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"' && cell.empty()) {
            quoted = true;
        } else if (c == delim) {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

// Column header → tag code. Accepts the tag itself or the spelled-out name.
std::string header_tag(const std::string& cell) {
    std::string key;
    for (char c : text::fold(trim(cell)))
        if (text::is_token_char(c)) key += c;
    static const std::map<std::string, std::string> kNames = {
        {"ut", "UT"}, {"accessionnumber", "UT"}, {"uid", "UT"},
        {"ti", "TI"}, {"title", "TI"}, {"articletitle", "TI"},
        {"py", "PY"}, {"year", "PY"}, {"publicationyear", "PY"},
        {"so", "SO"}, {"journal", "SO"}, {"journaltitle", "SO"}, {"sourcetitle", "SO"},
        {"sn", "SN"}, {"issn", "SN"},
        {"di", "DI"}, {"doi", "DI"},
        {"dt", "DT"}, {"doctype", "DT"}, {"documenttype", "DT"},
        {"og", "OG"}, {"organization", "OG"}, {"organizations", "OG"}, {"affiliation", "OG"},
        {"ad", "AD"}, {"address", "AD"}, {"addresses", "AD"},
        {"fo", "FO"}, {"fundingagency", "FO"}, {"fundingorgs", "FO"},
        {"fg", "FG"}, {"grantnumber", "FG"}, {"grantnumbers", "FG"},
        {"ft", "FT"}, {"fundingtext", "FT"},
    };
    auto it = kNames.find(key);
    return it == kNames.end() ? std::string() : it->second;
}

std::vector<PublishedRecord> parse_delimited(std::istream& in, const ParseOptions& opt,
                                             Diagnostics& diag) {
    std::string header;
    std::size_t lineno = 0;
    while (std::getline(in, header)) {
        ++lineno;
        header = strip_cr(header);
        if (!trim(header).empty()) break;
    }
    std::string trimmed = trim(header);
    if (trimmed.empty()) return {};
    char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> names = split_delimited_row(header, delim);
    std::vector<std::string> tags(names.size());
    bool any = false;
    for (std::size_t i = 0; i < names.size(); ++i) {
        tags[i] = header_tag(names[i]);
        any = any || !tags[i].empty();
    }
    if (!any)
        throw ConfigError("unrecognized export format at line " + std::to_string(lineno) +
                          ": " + header);

    std::vector<PublishedRecord> out;
    std::string line;
    std::size_t ordinal = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (trim(line).empty()) continue;
        ++ordinal;
        std::vector<std::string> cells = split_delimited_row(line, delim);
        RawRecord raw;
        for (std::size_t i = 0; i < cells.size() && i < tags.size(); ++i)
            if (!tags[i].empty() && !cells[i].empty()) raw.fields[tags[i]].push_back(cells[i]);
        if (auto rec = finish_record(raw, opt, ordinal, diag)) out.push_back(*rec);
        else diag.count("ingest.skipped_records");
    }
    return out;
}

// Precompiled term list: folded single tokens and folded phrases.
struct CompiledTerms {
    std::unordered_set<std::string> singles;
    std::vector<std::pair<std::string, std::vector<std::string>>> phrases; // term → tokens
    std::map<std::string, std::string> single_origin; // folded token → term string
};

CompiledTerms compile_terms(const TermList& terms) {
    CompiledTerms c;
    for (const std::string& term : terms.terms) {
        std::vector<std::string> toks = text::tokenize(term);
        if (toks.empty()) continue;
        if (toks.size() == 1) {
            c.singles.insert(toks[0]);
            c.single_origin.emplace(toks[0], term);
        } else {
            c.phrases.emplace_back(term, std::move(toks));
        }
    }
    return c;
}

void scan_field(const std::string& value, const char* label, const CompiledTerms& ct,
                std::set<std::pair<std::string, std::string>>& hits) {
    if (value.empty()) return;
    std::vector<std::string> toks = text::tokenize(value);
    for (const std::string& tok : toks) {
        auto it = ct.singles.find(tok);
        if (it != ct.singles.end()) hits.emplace(label, ct.single_origin.at(*it));
    }
    for (const auto& [term, ptoks] : ct.phrases) {
        if (ptoks.size() > toks.size()) continue;
        for (std::size_t s = 0; s + ptoks.size() <= toks.size(); ++s) {
            bool all = true;
            for (std::size_t j = 0; j < ptoks.size() && all; ++j) all = toks[s + j] == ptoks[j];
            if (all) {
                hits.emplace(label, term);
                break;
            }
        }
    }
}

FundingEvidence classify_against(const PublishedRecord& rec, const CompiledTerms& ct) {
    // Field-major, then term-lexicographic: independent of term-list order.
    std::set<std::pair<std::string, std::string>> hits;
    scan_field(rec.funding_agency, "FO", ct, hits);
    scan_field(rec.grant_numbers, "FG", ct, hits);
    scan_field(rec.funding_text, "FT", ct, hits);
    FundingEvidence ev;
    static const char* kOrder[] = {"FO", "FG", "FT"};
    for (const char* label : kOrder)
        for (const auto& [l, term] : hits)
            if (l == label) ev.matches.emplace_back(l, term);
    ev.government_funded = !ev.matches.empty();
    return ev;
}

} // namespace

std::vector<PublishedRecord> parse_export(std::istream& in, ExportFormat format,
                                          const ParseOptions& options, Diagnostics& diag) {
    if (!in) throw IoError("unreadable export stream: " + options.source_label);
    if (format == ExportFormat::Tagged) return parse_tagged(in, options, diag);
    return parse_delimited(in, options, diag);
}

ExportFormat sniff_format(std::istream& in) {
    std::string line;
    std::streampos start = in.tellg();
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (trim(line).empty()) continue;
        in.clear();
        in.seekg(start);
        return is_tag_line(line) ? ExportFormat::Tagged : ExportFormat::Delimited;
    }
    in.clear();
    in.seekg(start);
    return ExportFormat::Tagged;
}

TermList load_terms(std::istream& in) {
    TermList list;
    std::string line;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        list.terms.push_back(t);
    }
    return list;
}

const TermList& default_government_terms() {
    static const TermList kDefault{{
        "Spain", "Spanish", "MINECO", "MEC", "MINCINN", "Ministerio", "Espana",
        "CSIC", "ISCIII", "Carlos III Health Institute", "CICYT",
        "Consejo Superior de Investigaciones Cientificas", "Consolider Program",
        "FICYT", "FIS", "Fondo de Investigacion Sanitaria",
        "Fondo de Investigaciones Sanitarias", "INIA", "Iniciativa Ingenio",
        "Instituto Carlos III", "Instituto de Salud Carlos III", "MICINN",
        "Ministry of Economy and Competitiveness", "Ministry of Education",
        "Ministry of Education and Science", "Ministry of Science and Innovation",
        "Ministry of Science and Technology",
    }};
    return kDefault;
}

FundingEvidence classify_funding(const PublishedRecord& record, const TermList& terms) {
    return classify_against(record, compile_terms(terms));
}

std::vector<FundingEvidence> classify_funding_batch(std::span<const PublishedRecord> records,
                                                    const TermList& terms, int jobs) {
    CompiledTerms ct = compile_terms(terms);
    std::vector<FundingEvidence> out(records.size());
#ifdef _OPENMP
    if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 64) num_threads(jobs)
        for (long i = 0; i < static_cast<long>(records.size()); ++i)
            out[i] = classify_against(records[i], ct);
        return out;
    }
#else
    (void)jobs;
#endif
    for (std::size_t i = 0; i < records.size(); ++i) out[i] = classify_against(records[i], ct);
    return out;
}

std::vector<InstitutionProfile> load_profiles(std::istream& in) {
    std::vector<InstitutionProfile> profiles;
    std::set<std::string> seen;
    InstitutionProfile cur;
    bool open = false;
    std::string line;
    std::size_t lineno = 0;

    auto flush = [&] {
        if (!open) return;
        if (cur.acronym.empty()) throw ConfigError("institution profile without acronym");
        if (!seen.insert(cur.acronym).second)
            throw ConfigError("duplicate institution acronym: " + cur.acronym);
        if (!cur.address_expression_source.empty()) {
            try {
                cur.address_expression = query::parse(cur.address_expression_source);
            } catch (const QueryParseError& e) {
                throw ConfigError("profile " + cur.acronym + ": bad address expression: " +
                                  e.what());
            }
        }
        if (cur.match_mode != MatchMode::OrgOnly && !cur.address_expression)
            throw ConfigError("profile " + cur.acronym + " needs an address expression");
        if (cur.policy_ref.empty()) cur.policy_ref = cur.acronym;
        profiles.push_back(cur);
    };

    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            flush();
            cur = InstitutionProfile{};
            cur.acronym = trim(t.substr(1, t.size() - 2));
            open = true;
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos || !open)
            throw ConfigError("bad profile line " + std::to_string(lineno) + ": " + t);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "name") cur.display_name = value;
        else if (key == "organization") cur.organization = value;
        else if (key == "target") cur.repo_target = value;
        else if (key == "policy") cur.policy_ref = value;
        else if (key == "address_expression") cur.address_expression_source = value;
        else if (key == "match") {
            if (value == "org_or_address") cur.match_mode = MatchMode::OrgOrAddress;
            else if (value == "org_only") cur.match_mode = MatchMode::OrgOnly;
            else if (value == "address_only") cur.match_mode = MatchMode::AddressOnly;
            else throw ConfigError("profile " + cur.acronym + ": unknown match mode " + value);
        } else {
            throw ConfigError("profile " + cur.acronym + ": unknown key " + key);
        }
    }
    flush();
    return profiles;
}

std::vector<PublishedRecord> filter_by_institution(std::span<const PublishedRecord> records,
                                                   const InstitutionProfile& profile) {
    std::vector<std::string> org_tokens;
    if (!profile.organization.empty()) org_tokens = text::tokenize(profile.organization);

    std::vector<PublishedRecord> out;
    for (const PublishedRecord& rec : records) {
        bool keep = false;
        if (profile.match_mode != MatchMode::AddressOnly && !org_tokens.empty()) {
            std::vector<std::string> toks = text::tokenize(rec.org_field);
            for (std::size_t s = 0; !keep && s + org_tokens.size() <= toks.size(); ++s) {
                bool all = true;
                for (std::size_t j = 0; j < org_tokens.size() && all; ++j)
                    all = toks[s + j] == org_tokens[j];
                keep = all;
            }
        }
        if (!keep && profile.match_mode != MatchMode::OrgOnly && profile.address_expression) {
            keep = query::evaluate(*profile.address_expression, rec.address_field);
        }
        if (keep) out.push_back(rec);
    }
    return out;
}

} // namespace oa::ingest
