#include "oaaudit/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "oaaudit/errors.hpp"

namespace oa::metrics {

namespace {

using nlohmann::json;

std::optional<double> share(long part, long whole) {
    if (whole <= 0) return std::nullopt;
    return 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

json pct_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

std::optional<double> pct_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json counts_to_json(const InstitutionYearCounts& c) {
    return json{
        {"acronym", c.acronym},
        {"year", c.year_label},
        {"wos_total", c.wos_total},
        {"wos_gov", c.wos_gov},
        {"status", {{"open", c.by_status.open},
                    {"embargoed", c.by_status.embargoed},
                    {"closed", c.by_status.closed},
                    {"unknown", c.by_status.unknown}}},
        {"status_gov", {{"open", c.by_status_gov.open},
                        {"embargoed", c.by_status_gov.embargoed},
                        {"closed", c.by_status_gov.closed},
                        {"unknown", c.by_status_gov.unknown}}},
        {"color", {{"green", c.by_color.green},
                   {"blue", c.by_color.blue},
                   {"yellow", c.by_color.yellow},
                   {"white", c.by_color.white},
                   {"unclassified", c.by_color.unclassified}}},
        {"color_gov", {{"green", c.by_color_gov.green},
                       {"blue", c.by_color_gov.blue},
                       {"yellow", c.by_color_gov.yellow},
                       {"white", c.by_color_gov.white},
                       {"unclassified", c.by_color_gov.unclassified}}},
    };
}

InstitutionYearCounts counts_from_json(const json& j) {
    InstitutionYearCounts c;
    c.acronym = j.at("acronym").get<std::string>();
    c.year_label = j.at("year").get<std::string>();
    c.wos_total = j.at("wos_total").get<long>();
    c.wos_gov = j.at("wos_gov").get<long>();
    auto status = [](const json& s, StatusCounts& out) {
        out.open = s.at("open").get<long>();
        out.embargoed = s.at("embargoed").get<long>();
        out.closed = s.at("closed").get<long>();
        out.unknown = s.at("unknown").get<long>();
    };
    auto color = [](const json& s, ColorCounts& out) {
        out.green = s.at("green").get<long>();
        out.blue = s.at("blue").get<long>();
        out.yellow = s.at("yellow").get<long>();
        out.white = s.at("white").get<long>();
        out.unclassified = s.at("unclassified").get<long>();
    };
    status(j.at("status"), c.by_status);
    status(j.at("status_gov"), c.by_status_gov);
    color(j.at("color"), c.by_color);
    color(j.at("color_gov"), c.by_color_gov);
    return c;
}

json pai_to_json(const PaiPercentages& p) {
    return json{{"green", pct_json(p.green)},
                {"blue", pct_json(p.blue)},
                {"yellow", pct_json(p.yellow)},
                {"white", pct_json(p.white)},
                {"unclassified", pct_json(p.unclassified)}};
}

PaiPercentages pai_from_json(const json& j) {
    PaiPercentages p;
    p.green = pct_from_json(j.at("green"));
    p.blue = pct_from_json(j.at("blue"));
    p.yellow = pct_from_json(j.at("yellow"));
    p.white = pct_from_json(j.at("white"));
    p.unclassified = pct_from_json(j.at("unclassified"));
    return p;
}

json indices_to_json(const Indices& x) {
    return json{
        {"deposit_inst_pct", pct_json(x.deposit_inst_pct)},
        {"deposit_gov_pct", pct_json(x.deposit_gov_pct)},
        {"ici_pct", pct_json(x.ici_pct)},
        {"gci_pct", pct_json(x.gci_pct)},
        {"pai", pai_to_json(x.pai)},
        {"pai_gov", pai_to_json(x.pai_gov)},
        {"potential_oa_pct", pct_json(x.potential_oa_pct)},
        {"potential_oa_gov_pct", pct_json(x.potential_oa_gov_pct)},
        {"gap_inst_pct", pct_json(x.gap_inst_pct)},
        {"gap_gov_pct", pct_json(x.gap_gov_pct)},
        {"anomalies", x.anomalies},
    };
}

Indices indices_from_json(const json& j) {
    Indices x;
    x.deposit_inst_pct = pct_from_json(j.at("deposit_inst_pct"));
    x.deposit_gov_pct = pct_from_json(j.at("deposit_gov_pct"));
    x.ici_pct = pct_from_json(j.at("ici_pct"));
    x.gci_pct = pct_from_json(j.at("gci_pct"));
    x.pai = pai_from_json(j.at("pai"));
    x.pai_gov = pai_from_json(j.at("pai_gov"));
    x.potential_oa_pct = pct_from_json(j.at("potential_oa_pct"));
    x.potential_oa_gov_pct = pct_from_json(j.at("potential_oa_gov_pct"));
    x.gap_inst_pct = pct_from_json(j.at("gap_inst_pct"));
    x.gap_gov_pct = pct_from_json(j.at("gap_gov_pct"));
    x.anomalies = j.at("anomalies").get<std::vector<std::string>>();
    return x;
}

} // namespace

InstitutionYearCounts tally(
    std::span<const match::MatchOutcome> outcomes,
    const std::unordered_map<std::string, policy::AccessStatus>& deposit_status,
    const std::unordered_map<std::string, bool>& funded,
    const std::unordered_map<std::string, policy::RomeoColor>& colors,
    const std::string& acronym, const std::string& year_label) {
    InstitutionYearCounts c;
    c.acronym = acronym;
    c.year_label = year_label;
    for (const match::MatchOutcome& o : outcomes) {
        auto fit = funded.find(o.published_uid);
        auto cit = colors.find(o.published_uid);
        if (fit == funded.end() || cit == colors.end())
            throw IntegrityError("tally: outcome cites unknown published record " +
                                 o.published_uid);
        bool gov = fit->second;
        ++c.wos_total;
        if (gov) ++c.wos_gov;

        auto bump_color = [&cit](ColorCounts& cc) {
            switch (cit->second) {
                case policy::RomeoColor::Green: ++cc.green; break;
                case policy::RomeoColor::Blue: ++cc.blue; break;
                case policy::RomeoColor::Yellow: ++cc.yellow; break;
                case policy::RomeoColor::White: ++cc.white; break;
                case policy::RomeoColor::Unclassified: ++cc.unclassified; break;
            }
        };
        bump_color(c.by_color);
        if (gov) bump_color(c.by_color_gov);

        if (!o.deposit_uid) continue;
        auto sit = deposit_status.find(*o.deposit_uid);
        if (sit == deposit_status.end())
            throw IntegrityError("tally: outcome cites unknown deposit " + *o.deposit_uid);
        auto bump_status = [&sit](StatusCounts& sc) {
            switch (sit->second.kind) {
                case policy::AccessKind::Open: ++sc.open; break;
                case policy::AccessKind::Embargoed: ++sc.embargoed; break;
                case policy::AccessKind::Closed: ++sc.closed; break;
                case policy::AccessKind::Unknown: ++sc.unknown; break;
            }
        };
        bump_status(c.by_status);
        if (gov) bump_status(c.by_status_gov);
    }
    return c;
}

std::optional<double> ici(const InstitutionYearCounts& c) {
    return share(c.by_status.compliant(), c.wos_total);
}

std::optional<double> gci(const InstitutionYearCounts& c) {
    return share(c.by_status_gov.compliant(), c.wos_gov);
}

std::optional<double> deposit_ratio(const InstitutionYearCounts& c, bool gov_only) {
    if (gov_only) return share(c.deposited_gov(), c.wos_gov);
    return share(c.deposited(), c.wos_total);
}

PaiPercentages pai(const InstitutionYearCounts& c, bool gov_only) {
    const ColorCounts& cc = gov_only ? c.by_color_gov : c.by_color;
    long denom = gov_only ? c.wos_gov : c.wos_total;
    PaiPercentages p;
    p.green = share(cc.green, denom);
    p.blue = share(cc.blue, denom);
    p.yellow = share(cc.yellow, denom);
    p.white = share(cc.white, denom);
    p.unclassified = share(cc.unclassified, denom);
    return p;
}

std::optional<double> potential_oa(const PaiPercentages& p) {
    if (!p.green || !p.blue) return std::nullopt;
    return *p.green + *p.blue;
}

std::optional<double> gap(std::optional<double> real, std::optional<double> potential) {
    if (!real || !potential) return std::nullopt;
    return *potential - *real;
}

Indices compute_indices(const InstitutionYearCounts& c) {
    Indices x;
    x.deposit_inst_pct = deposit_ratio(c, false);
    x.deposit_gov_pct = deposit_ratio(c, true);
    x.ici_pct = ici(c);
    x.gci_pct = gci(c);
    x.pai = pai(c, false);
    x.pai_gov = pai(c, true);
    x.potential_oa_pct = potential_oa(x.pai);
    x.potential_oa_gov_pct = potential_oa(x.pai_gov);
    x.gap_inst_pct = gap(x.ici_pct, x.potential_oa_pct);
    x.gap_gov_pct = gap(x.gci_pct, x.potential_oa_gov_pct);
    if (x.gap_inst_pct && *x.gap_inst_pct < 0) x.anomalies.push_back("gap_inst_negative");
    if (x.gap_gov_pct && *x.gap_gov_pct < 0) x.anomalies.push_back("gap_gov_negative");
    return x;
}

double round1(double v) {
    return std::round(v * 10.0) / 10.0; // std::round halves away from zero
}

std::string format_pct(const std::optional<double>& v, bool rounded) {
    if (!v) return "NA";
    char buf[48];
    if (rounded) std::snprintf(buf, sizeof buf, "%.1f", round1(*v));
    else std::snprintf(buf, sizeof buf, "%.10g", *v);
    return buf;
}

void emit_delimited(const ComplianceReport& report, std::ostream& out) {
    static const char* kPctCols[] = {
        "deposit_inst_pct", "ici_pct", "deposit_gov_pct", "gci_pct",
        "pai_green_pct", "pai_blue_pct", "pai_yellow_pct", "pai_white_pct",
        "pai_unclassified_pct", "potential_oa_pct", "gap_inst_pct",
        "pai_gov_green_pct", "pai_gov_blue_pct", "pai_gov_yellow_pct",
        "pai_gov_white_pct", "pai_gov_unclassified_pct", "potential_oa_gov_pct",
        "gap_gov_pct",
    };
    out << "acronym\tyear\twos_total\twos_gov\tdeposited\tdeposited_gov"
        << "\topen\tembargoed\tclosed\tunknown";
    for (const char* col : kPctCols) out << '\t' << col;
    out << "\tanomaly_flags";
    for (const char* col : kPctCols) out << '\t' << col << "_raw";
    out << '\n';

    for (const ReportEntry& e : report.entries) {
        const InstitutionYearCounts& c = e.counts;
        const Indices& x = e.indices;
        const std::optional<double> ordered[] = {
            x.deposit_inst_pct, x.ici_pct, x.deposit_gov_pct, x.gci_pct,
            x.pai.green, x.pai.blue, x.pai.yellow, x.pai.white, x.pai.unclassified,
            x.potential_oa_pct, x.gap_inst_pct,
            x.pai_gov.green, x.pai_gov.blue, x.pai_gov.yellow, x.pai_gov.white,
            x.pai_gov.unclassified, x.potential_oa_gov_pct, x.gap_gov_pct,
        };
        out << c.acronym << '\t' << c.year_label << '\t' << c.wos_total << '\t' << c.wos_gov
            << '\t' << c.deposited() << '\t' << c.deposited_gov() << '\t' << c.by_status.open
            << '\t' << c.by_status.embargoed << '\t' << c.by_status.closed << '\t'
            << c.by_status.unknown;
        for (const auto& v : ordered) out << '\t' << format_pct(v, true);
        out << '\t';
        for (std::size_t i = 0; i < x.anomalies.size(); ++i) {
            if (i) out << ';';
            out << x.anomalies[i];
        }
        for (const auto& v : ordered) out << '\t' << format_pct(v, false);
        out << '\n';
    }
}

void emit_diagnostics(const std::map<std::string, std::uint64_t>& diagnostics,
                      std::ostream& out) {
    out << "category\tcount\n";
    for (const auto& [category, count] : diagnostics)
        out << category << '\t' << count << '\n';
}

void emit_structured(const ComplianceReport& report, std::ostream& out) {
    json doc;
    doc["year_from"] = report.year_from;
    doc["year_to"] = report.year_to;
    doc["romeo_snapshot_date"] = report.romeo_snapshot_date;
    doc["audit_date"] = report.audit_date;
    doc["entries"] = json::array();
    for (const ReportEntry& e : report.entries)
        doc["entries"].push_back(
            json{{"counts", counts_to_json(e.counts)}, {"indices", indices_to_json(e.indices)}});
    doc["diagnostics"] = report.diagnostics;
    out << doc.dump(2) << '\n';
}

ComplianceReport read_structured(std::istream& in) {
    json doc = json::parse(in);
    ComplianceReport report;
    report.year_from = doc.at("year_from").get<int>();
    report.year_to = doc.at("year_to").get<int>();
    report.romeo_snapshot_date = doc.at("romeo_snapshot_date").get<std::string>();
    report.audit_date = doc.at("audit_date").get<std::string>();
    for (const json& e : doc.at("entries")) {
        ReportEntry entry;
        entry.counts = counts_from_json(e.at("counts"));
        entry.indices = indices_from_json(e.at("indices"));
        report.entries.push_back(std::move(entry));
    }
    report.diagnostics =
        doc.at("diagnostics").get<std::map<std::string, std::uint64_t>>();
    return report;
}

} // namespace oa::metrics
