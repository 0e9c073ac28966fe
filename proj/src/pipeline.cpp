#include "oaaudit/pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "oaaudit/errors.hpp"
#include "oaaudit/harvest.hpp"
#include "oaaudit/match.hpp"
#include "oaaudit/metrics.hpp"
#include "oaaudit/policy.hpp"

namespace oa::pipeline {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const ingest::PublishedRecord& r, const ingest::FundingEvidence& ev) {
    json matches = json::array();
    for (const auto& [field, term] : ev.matches) matches.push_back(json::array({field, term}));
    return json{
        {"uid", r.uid},
        {"title", r.title},
        {"journal", r.journal_title},
        {"doc_type", r.doc_type},
        {"org", r.org_field},
        {"address", r.address_field},
        {"fo", r.funding_agency},
        {"fg", r.grant_numbers},
        {"ft", r.funding_text},
        {"doi", r.doi ? json(*r.doi) : json(nullptr)},
        {"issn", r.issn ? json(*r.issn) : json(nullptr)},
        {"year", r.year},
        {"funded", ev.government_funded},
        {"funding_matches", matches},
    };
}

ingest::PublishedRecord published_from_json(const json& j) {
    ingest::PublishedRecord r;
    r.uid = j.at("uid").get<std::string>();
    r.title = j.at("title").get<std::string>();
    r.journal_title = j.at("journal").get<std::string>();
    r.doc_type = j.at("doc_type").get<std::string>();
    r.org_field = j.at("org").get<std::string>();
    r.address_field = j.at("address").get<std::string>();
    r.funding_agency = j.at("fo").get<std::string>();
    r.grant_numbers = j.at("fg").get<std::string>();
    r.funding_text = j.at("ft").get<std::string>();
    if (!j.at("doi").is_null()) r.doi = j.at("doi").get<std::string>();
    if (!j.at("issn").is_null()) r.issn = j.at("issn").get<std::string>();
    r.year = j.at("year").get<int>();
    return r;
}

json to_json(const harvest::RepoRecord& r) {
    return json{
        {"uid", r.uid},
        {"target", r.source_target},
        {"title", r.title},
        {"creators", r.creators},
        {"contributors", r.contributors},
        {"year", r.year ? json(*r.year) : json(nullptr)},
        {"identifiers", r.identifiers},
        {"relations", r.relations},
        {"rights", r.rights_raw},
        {"doc_type", r.doc_type_raw},
    };
}

harvest::RepoRecord repo_from_json(const json& j) {
    harvest::RepoRecord r;
    r.uid = j.at("uid").get<std::string>();
    r.source_target = j.at("target").get<std::string>();
    r.title = j.at("title").get<std::string>();
    r.creators = j.at("creators").get<std::vector<std::string>>();
    r.contributors = j.at("contributors").get<std::vector<std::string>>();
    if (!j.at("year").is_null()) r.year = j.at("year").get<int>();
    r.identifiers = j.at("identifiers").get<std::vector<std::string>>();
    r.relations = j.at("relations").get<std::vector<std::string>>();
    r.rights_raw = j.at("rights").get<std::vector<std::string>>();
    r.doc_type_raw = j.at("doc_type").get<std::string>();
    return r;
}

const char* basis_name(match::MatchBasis b) {
    switch (b) {
        case match::MatchBasis::Doi: return "doi";
        case match::MatchBasis::Title: return "title";
        case match::MatchBasis::None: return "none";
    }
    return "none";
}

match::MatchBasis basis_from_name(const std::string& s) {
    if (s == "doi") return match::MatchBasis::Doi;
    if (s == "title") return match::MatchBasis::Title;
    return match::MatchBasis::None;
}

json diagnostics_to_json(const Diagnostics& diag) {
    json out = json::object();
    for (const auto& [k, v] : diag.counts()) out[k] = v;
    return out;
}

void merge_diagnostics_json(const json& doc, std::map<std::string, std::uint64_t>& into) {
    if (!doc.contains("diagnostics")) return;
    for (const auto& [k, v] : doc.at("diagnostics").items())
        into[k] += v.get<std::uint64_t>();
}

fs::path out_path(const AuditContext& ctx, const char* name) {
    return fs::path(ctx.config.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

json read_json(const fs::path& path, const char* producer) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("missing intermediate input " + path.string() + "; run the " +
                          producer + " stage first");
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("unreadable intermediate " + path.string() + ": " + e.what());
    }
}

// Stale or hand-edited intermediates would silently skew counts; insist that
// the institution sets line up with the current configuration.
void check_acronyms(const json& doc, const AuditContext& ctx, const char* file) {
    std::set<std::string> in_doc, in_ctx;
    for (const json& inst : doc.at("institutions"))
        in_doc.insert(inst.at("acronym").get<std::string>());
    for (const auto& p : ctx.profiles) in_ctx.insert(p.acronym);
    if (in_doc != in_ctx)
        throw ConfigError(std::string(file) +
                          " does not cover the selected institutions; re-run the producing stage");
}

policy::Date effective_audit_date(const AuditConfig& cfg) {
    if (cfg.audit_date.empty()) return policy::Date{9999, 12, 31};
    auto d = policy::Date::parse(cfg.audit_date);
    if (!d) throw ConfigError("bad audit date: " + cfg.audit_date);
    return *d;
}

ingest::TermList load_term_list(const AuditConfig& cfg) {
    if (cfg.terms_path.empty()) return ingest::default_government_terms();
    std::ifstream in(cfg.terms_path);
    if (!in) throw ConfigError("cannot read term list: " + cfg.terms_path);
    return ingest::load_terms(in);
}

} // namespace

AuditContext validate(const AuditConfig& config) {
    if (config.institutions.empty())
        throw ConfigError("no institutions selected; pass --institutions all or a list");
    if (config.year_from < 1000 || config.year_to > 9999 || config.year_from > config.year_to)
        throw ConfigError("invalid year window " + std::to_string(config.year_from) + ".." +
                          std::to_string(config.year_to));
    if (!(config.threshold > 0.0 && config.threshold < 1.0))
        throw ConfigError("similarity threshold must lie strictly between 0 and 1");
    if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
    if (config.page_size < 1) throw ConfigError("page size must be >= 1");
    if (config.format != "delimited" && config.format != "structured")
        throw ConfigError("unknown report format: " + config.format);
    if (config.published_format != "auto" && config.published_format != "tagged" &&
        config.published_format != "delimited")
        throw ConfigError("unknown export format: " + config.published_format);
    if (config.profiles_path.empty())
        throw ConfigError("no institution profile file configured (--profiles)");

    std::ifstream in(config.profiles_path);
    if (!in) throw ConfigError("cannot read profiles: " + config.profiles_path);
    std::vector<ingest::InstitutionProfile> all = ingest::load_profiles(in);

    AuditContext ctx;
    ctx.config = config;
    if (config.institutions.size() == 1 && config.institutions[0] == "all") {
        ctx.profiles = std::move(all);
    } else {
        std::set<std::string> wanted;
        for (const std::string& a : config.institutions)
            if (!wanted.insert(a).second)
                throw ConfigError("institution listed twice: " + a);
        for (const std::string& a : wanted) {
            auto it = std::find_if(all.begin(), all.end(),
                                   [&a](const auto& p) { return p.acronym == a; });
            if (it == all.end()) throw ConfigError("unknown institution acronym: " + a);
            ctx.profiles.push_back(*it);
        }
    }
    std::sort(ctx.profiles.begin(), ctx.profiles.end(),
              [](const auto& a, const auto& b) { return a.acronym < b.acronym; });

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.out_dir);
    return ctx;
}

void stage_ingest(const AuditContext& ctx, bool dry_run) {
    const AuditConfig& cfg = ctx.config;
    if (cfg.published_inputs.empty())
        throw ConfigError("no export files configured (--published)");
    ingest::TermList terms = load_term_list(cfg);

    Diagnostics diag;
    std::vector<ingest::PublishedRecord> all;
    for (const std::string& input : cfg.published_inputs) {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw IoError("cannot read export file: " + input);
        ingest::ParseOptions opt;
        opt.year_from = cfg.year_from;
        opt.year_to = cfg.year_to;
        opt.source_label = fs::path(input).filename().string();
        ingest::ExportFormat format;
        if (cfg.published_format == "tagged") format = ingest::ExportFormat::Tagged;
        else if (cfg.published_format == "delimited") format = ingest::ExportFormat::Delimited;
        else format = ingest::sniff_format(in);
        std::vector<ingest::PublishedRecord> recs = ingest::parse_export(in, format, opt, diag);
        std::move(recs.begin(), recs.end(), std::back_inserter(all));
    }

    // Canonical order, so reports do not depend on input file order.
    auto key = [](const ingest::PublishedRecord& r) {
        return std::tie(r.uid, r.year, r.title, r.journal_title);
    };
    std::sort(all.begin(), all.end(),
              [&key](const auto& a, const auto& b) { return key(a) < key(b); });
    std::vector<ingest::PublishedRecord> unique;
    unique.reserve(all.size());
    for (auto& rec : all) {
        if (!unique.empty() && unique.back().uid == rec.uid) {
            diag.count("ingest.duplicate_uids");
            continue;
        }
        unique.push_back(std::move(rec));
    }

    json doc;
    doc["window"] = {{"from", cfg.year_from}, {"to", cfg.year_to}};
    doc["institutions"] = json::array();
    std::size_t attributed = 0;
    for (const ingest::InstitutionProfile& profile : ctx.profiles) {
        std::vector<ingest::PublishedRecord> mine =
            ingest::filter_by_institution(unique, profile);
        std::vector<ingest::FundingEvidence> evidence =
            ingest::classify_funding_batch(mine, terms, cfg.jobs);
        attributed += mine.size();
        if (dry_run) {
            std::cout << profile.acronym << "\t" << mine.size() << "\n";
            continue;
        }
        json records = json::array();
        for (std::size_t i = 0; i < mine.size(); ++i)
            records.push_back(to_json(mine[i], evidence[i]));
        doc["institutions"].push_back(
            json{{"acronym", profile.acronym}, {"records", std::move(records)}});
    }
    if (dry_run) {
        std::cout << "total\t" << unique.size() << "\nattributed\t" << attributed << "\n";
        return;
    }
    doc["diagnostics"] = diagnostics_to_json(diag);
    write_json(out_path(ctx, "published.json"), doc);
}

void stage_harvest(const AuditContext& ctx) {
    const AuditConfig& cfg = ctx.config;
    if (cfg.fixtures_dir.empty() == cfg.endpoint.empty())
        throw ConfigError("configure exactly one of --fixtures and --endpoint");
    harvest::EndpointConfig ep;
    ep.endpoint = cfg.endpoint.empty() ? cfg.fixtures_dir : cfg.endpoint;
    ep.max_retries = cfg.max_retries;
    ep.backoff_ms = cfg.backoff_ms;
    ep.parallelism = cfg.fetch_parallelism;

    Diagnostics diag;
    json doc;
    doc["institutions"] = json::array();
    for (const ingest::InstitutionProfile& profile : ctx.profiles) {
        if (profile.repo_target.empty())
            throw ConfigError("profile " + profile.acronym + " has no harvest target");
        harvest::HarvestRequest req;
        req.target = profile.repo_target;
        req.year_from = cfg.year_from;
        req.year_to = cfg.year_to;
        req.page_size = cfg.page_size;
        std::vector<harvest::HarvestPage> pages = harvest::fetch_all(ep, req, diag);
        std::vector<harvest::RepoRecord> records;
        for (harvest::HarvestPage& page : pages)
            std::move(page.records.begin(), page.records.end(), std::back_inserter(records));
        records = harvest::filter_articles(std::move(records), cfg.year_from, cfg.year_to, diag);
        json recs = json::array();
        for (const harvest::RepoRecord& r : records) recs.push_back(to_json(r));
        doc["institutions"].push_back(json{{"acronym", profile.acronym},
                                           {"target", profile.repo_target},
                                           {"records", std::move(recs)}});
    }
    doc["diagnostics"] = diagnostics_to_json(diag);
    write_json(out_path(ctx, "deposits.json"), doc);
}

void stage_match(const AuditContext& ctx) {
    const AuditConfig& cfg = ctx.config;
    json pub_doc = read_json(out_path(ctx, "published.json"), "ingest");
    json dep_doc = read_json(out_path(ctx, "deposits.json"), "harvest");
    check_acronyms(pub_doc, ctx, "published.json");
    check_acronyms(dep_doc, ctx, "deposits.json");
    policy::Date audit_date = effective_audit_date(cfg);

    std::map<std::string, const json*> deposits_by_acronym;
    for (const json& inst : dep_doc.at("institutions"))
        deposits_by_acronym[inst.at("acronym").get<std::string>()] = &inst;

    Diagnostics diag;
    json doc;
    doc["institutions"] = json::array();
    std::ostringstream queue_out;
    queue_out << "acronym\tpublished_uid\tdeposit_uid\tpublished_title\tdeposit_title"
              << "\tsimilarity\n";

    for (const json& pub_inst : pub_doc.at("institutions")) {
        std::string acronym = pub_inst.at("acronym").get<std::string>();
        std::vector<ingest::PublishedRecord> published;
        for (const json& rec : pub_inst.at("records"))
            published.push_back(published_from_json(rec));

        std::vector<harvest::RepoRecord> deposits;
        for (const json& rec : deposits_by_acronym.at(acronym)->at("records"))
            deposits.push_back(repo_from_json(rec));

        deposits = match::dedup_within_institution(std::move(deposits), &diag);
        json status_json = json::object();
        std::unordered_map<std::string, bool> claimed;
        for (const harvest::RepoRecord& dep : deposits) {
            policy::AccessStatus st = policy::classify_rights(dep, audit_date, &diag);
            status_json[dep.uid] =
                json{{"kind", policy::to_string(st.kind)},
                     {"expiry", st.embargo_expiry ? json(st.embargo_expiry->to_string())
                                                  : json(nullptr)}};
        }

        std::vector<match::MatchOutcome> outcomes =
            match::link(published, deposits, cfg.jobs);

        json outcome_json = json::array();
        std::set<std::string> linked;
        for (const match::MatchOutcome& o : outcomes) {
            outcome_json.push_back(
                json{{"published_uid", o.published_uid},
                     {"deposit_uid", o.deposit_uid ? json(*o.deposit_uid) : json(nullptr)},
                     {"basis", basis_name(o.basis)},
                     {"year_checked", o.year_checked}});
            if (o.deposit_uid) linked.insert(*o.deposit_uid);
        }

        std::vector<ingest::PublishedRecord> unmatched;
        for (std::size_t i = 0; i < outcomes.size(); ++i)
            if (!outcomes[i].deposit_uid) unmatched.push_back(published[i]);
        std::vector<harvest::RepoRecord> unlinked;
        for (const harvest::RepoRecord& dep : deposits)
            if (!linked.count(dep.uid)) unlinked.push_back(dep);

        std::vector<match::ReviewCandidate> queue =
            match::review_queue(unmatched, unlinked, cfg.threshold, cfg.jobs);
        for (const match::ReviewCandidate& c : queue) {
            char sim[32];
            std::snprintf(sim, sizeof sim, "%.6f", c.similarity);
            queue_out << acronym << '\t' << c.published_uid << '\t' << c.deposit_uid << '\t'
                      << c.published_key << '\t' << c.deposit_key << '\t' << sim << '\n';
        }

        doc["institutions"].push_back(json{{"acronym", acronym},
                                           {"outcomes", std::move(outcome_json)},
                                           {"deposit_status", std::move(status_json)}});
    }
    doc["diagnostics"] = diagnostics_to_json(diag);
    write_json(out_path(ctx, "matches.json"), doc);
    write_text(out_path(ctx, "review_queue.tsv"), queue_out.str());
}

void stage_report(const AuditContext& ctx) {
    const AuditConfig& cfg = ctx.config;
    json pub_doc = read_json(out_path(ctx, "published.json"), "ingest");
    json match_doc = read_json(out_path(ctx, "matches.json"), "match");
    check_acronyms(pub_doc, ctx, "published.json");
    check_acronyms(match_doc, ctx, "matches.json");

    if (cfg.romeo_path.empty())
        throw ConfigError("no journal color snapshot configured (--romeo)");
    std::ifstream romeo_in(cfg.romeo_path);
    if (!romeo_in) throw ConfigError("cannot read snapshot: " + cfg.romeo_path);
    policy::RomeoSnapshot romeo = policy::RomeoSnapshot::load(romeo_in);

    if (cfg.policies_path.empty())
        throw ConfigError("no policy registry configured (--policies)");
    std::ifstream pol_in(cfg.policies_path);
    if (!pol_in) throw ConfigError("cannot read policy registry: " + cfg.policies_path);
    policy::PolicyRegistry registry = policy::PolicyRegistry::load(pol_in);
    for (const ingest::InstitutionProfile& p : ctx.profiles)
        registry.at(p.policy_ref); // unknown policy_ref fails here

    std::map<std::string, const json*> pub_by_acronym;
    for (const json& inst : pub_doc.at("institutions"))
        pub_by_acronym[inst.at("acronym").get<std::string>()] = &inst;

    metrics::ComplianceReport report;
    report.year_from = cfg.year_from;
    report.year_to = cfg.year_to;
    report.romeo_snapshot_date = romeo.snapshot_date();
    report.audit_date = cfg.audit_date;

    for (const json& match_inst : match_doc.at("institutions")) {
        std::string acronym = match_inst.at("acronym").get<std::string>();
        const json& pub_inst = *pub_by_acronym.at(acronym);

        std::unordered_map<std::string, bool> funded;
        std::unordered_map<std::string, policy::RomeoColor> colors;
        std::unordered_map<std::string, int> pub_year;
        for (const json& rec : pub_inst.at("records")) {
            std::string uid = rec.at("uid").get<std::string>();
            funded[uid] = rec.at("funded").get<bool>();
            std::optional<std::string> issn;
            if (!rec.at("issn").is_null()) issn = rec.at("issn").get<std::string>();
            colors[uid] = romeo.lookup(rec.at("journal").get<std::string>(), issn);
            pub_year[uid] = rec.at("year").get<int>();
        }

        std::unordered_map<std::string, policy::AccessStatus> statuses;
        for (const auto& [uid, st] : match_inst.at("deposit_status").items()) {
            policy::AccessStatus status;
            std::string kind = st.at("kind").get<std::string>();
            if (kind == "open") status.kind = policy::AccessKind::Open;
            else if (kind == "embargoed") status.kind = policy::AccessKind::Embargoed;
            else if (kind == "closed") status.kind = policy::AccessKind::Closed;
            else status.kind = policy::AccessKind::Unknown;
            if (!st.at("expiry").is_null())
                status.embargo_expiry = policy::Date::parse(st.at("expiry").get<std::string>());
            statuses[uid] = status;
        }

        std::vector<match::MatchOutcome> all_outcomes;
        for (const json& o : match_inst.at("outcomes")) {
            match::MatchOutcome out;
            out.published_uid = o.at("published_uid").get<std::string>();
            if (!o.at("deposit_uid").is_null())
                out.deposit_uid = o.at("deposit_uid").get<std::string>();
            out.basis = basis_from_name(o.at("basis").get<std::string>());
            out.year_checked = o.at("year_checked").get<bool>();
            all_outcomes.push_back(std::move(out));
        }

        auto add_entry = [&](std::span<const match::MatchOutcome> outcomes,
                             const std::string& label) {
            metrics::ReportEntry entry;
            entry.counts = metrics::tally(outcomes, statuses, funded, colors, acronym, label);
            entry.indices = metrics::compute_indices(entry.counts);
            report.entries.push_back(std::move(entry));
        };

        for (int year = cfg.year_from; year <= cfg.year_to; ++year) {
            std::vector<match::MatchOutcome> subset;
            for (const match::MatchOutcome& o : all_outcomes) {
                auto it = pub_year.find(o.published_uid);
                if (it == pub_year.end())
                    throw IntegrityError("report: outcome cites unknown published record " +
                                         o.published_uid);
                if (it->second == year) subset.push_back(o);
            }
            add_entry(subset, std::to_string(year));
        }
        if (cfg.year_from != cfg.year_to)
            add_entry(all_outcomes,
                      std::to_string(cfg.year_from) + "-" + std::to_string(cfg.year_to));
    }

    std::map<std::string, std::uint64_t> diagnostics;
    merge_diagnostics_json(pub_doc, diagnostics);
    merge_diagnostics_json(read_json(out_path(ctx, "deposits.json"), "harvest"), diagnostics);
    merge_diagnostics_json(match_doc, diagnostics);
    report.diagnostics = diagnostics;

    if (cfg.format == "structured") {
        std::ostringstream out;
        metrics::emit_structured(report, out);
        write_text(out_path(ctx, "report.json"), out.str());
    } else {
        std::ostringstream out;
        metrics::emit_delimited(report, out);
        write_text(out_path(ctx, "report.tsv"), out.str());
    }
    std::ostringstream diag_out;
    metrics::emit_diagnostics(report.diagnostics, diag_out);
    write_text(out_path(ctx, "diagnostics.tsv"), diag_out.str());
}

void run_audit(const AuditContext& ctx) {
    stage_ingest(ctx);
    stage_harvest(ctx);
    stage_match(ctx);
    stage_report(ctx);
}

} // namespace oa::pipeline
