#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oaaudit/errors.hpp"
#include "oaaudit/pipeline.hpp"

namespace {

using oa::pipeline::AuditConfig;

void add_selection(CLI::App* cmd, AuditConfig& cfg) {
    cmd->add_option("--institutions", cfg.institutions,
                    "Acronyms to audit (comma separated), or 'all'")
        ->delimiter(',');
    cmd->add_option("--from-year", cfg.year_from, "First publication year")->required();
    cmd->add_option("--to-year", cfg.year_to, "Last publication year")->required();
    cmd->add_option("--profiles", cfg.profiles_path, "Institution profile file")->required();
    cmd->add_option("--out", cfg.out_dir, "Output directory");
    cmd->add_option("--jobs", cfg.jobs, "Worker threads for CPU-bound stages");
    cmd->set_config("--config", "", "Key=value presets; command line wins");
}

void add_ingest(CLI::App* cmd, AuditConfig& cfg) {
    cmd->add_option("--published", cfg.published_inputs,
                    "Citation-database export file (repeatable)")
        ->required();
    cmd->add_option("--export-format", cfg.published_format,
                    "Export layout: auto, tagged or delimited")
        ->check(CLI::IsMember({"auto", "tagged", "delimited"}));
    cmd->add_option("--terms", cfg.terms_path, "Government funder term list");
}

void add_harvest(CLI::App* cmd, AuditConfig& cfg) {
    cmd->add_option("--fixtures", cfg.fixtures_dir, "Directory of recorded result pages");
    cmd->add_option("--endpoint", cfg.endpoint, "Live search endpoint, http://host[:port]/path")
        ->envname("OA_AUDIT_ENDPOINT");
    cmd->add_option("--page-size", cfg.page_size, "Records requested per page");
    cmd->add_option("--max-retries", cfg.max_retries, "Retries per page after a transient failure");
    cmd->add_option("--backoff-ms", cfg.backoff_ms, "Base retry backoff in milliseconds");
    cmd->add_option("--fetch-parallelism", cfg.fetch_parallelism, "Concurrent page fetches");
}

void add_match(CLI::App* cmd, AuditConfig& cfg) {
    cmd->add_option("--threshold", cfg.threshold,
                    "Near-miss similarity cutoff for the review queue");
    cmd->add_option("--audit-date", cfg.audit_date, "Embargo evaluation date, YYYY-MM-DD");
}

void add_report(CLI::App* cmd, AuditConfig& cfg) {
    cmd->add_option("--romeo", cfg.romeo_path, "Journal color snapshot")->required();
    cmd->add_option("--policies", cfg.policies_path, "Institutional policy registry")->required();
    cmd->add_option("--format", cfg.format, "Report format: delimited or structured")
        ->check(CLI::IsMember({"delimited", "structured"}));
    cmd->add_option("--audit-date", cfg.audit_date, "Embargo evaluation date, YYYY-MM-DD");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch open-access compliance audits over citation exports and "
                 "repository deposits"};
    app.require_subcommand(1);

    AuditConfig cfg;
    bool dry_run = false;

    CLI::App* run = app.add_subcommand("run", "Full audit: ingest, harvest, match, report");
    add_selection(run, cfg);
    add_ingest(run, cfg);
    add_harvest(run, cfg);
    run->add_option("--threshold", cfg.threshold,
                    "Near-miss similarity cutoff for the review queue");
    run->add_option("--romeo", cfg.romeo_path, "Journal color snapshot")->required();
    run->add_option("--policies", cfg.policies_path, "Institutional policy registry")->required();
    run->add_option("--format", cfg.format, "Report format: delimited or structured")
        ->check(CLI::IsMember({"delimited", "structured"}));
    run->add_option("--audit-date", cfg.audit_date, "Embargo evaluation date, YYYY-MM-DD");

    CLI::App* ingest = app.add_subcommand("ingest", "Parse exports and attribute records");
    add_selection(ingest, cfg);
    add_ingest(ingest, cfg);
    ingest->add_flag("--dry-run", dry_run, "Print per-institution record counts and stop");

    CLI::App* harvest = app.add_subcommand("harvest", "Collect repository deposits");
    add_selection(harvest, cfg);
    add_harvest(harvest, cfg);

    CLI::App* match = app.add_subcommand("match", "Deduplicate, classify and link deposits");
    add_selection(match, cfg);
    add_match(match, cfg);

    CLI::App* report = app.add_subcommand("report", "Tally indices and write the report");
    add_selection(report, cfg);
    add_report(report, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        oa::pipeline::AuditContext ctx = oa::pipeline::validate(cfg);
        if (run->parsed()) oa::pipeline::run_audit(ctx);
        else if (ingest->parsed()) oa::pipeline::stage_ingest(ctx, dry_run);
        else if (harvest->parsed()) oa::pipeline::stage_harvest(ctx);
        else if (match->parsed()) oa::pipeline::stage_match(ctx);
        else if (report->parsed()) oa::pipeline::stage_report(ctx);
    } catch (const oa::AuditError& e) {
        std::cerr << "oa_audit: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "oa_audit: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
