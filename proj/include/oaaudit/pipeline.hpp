#ifndef OAAUDIT_PIPELINE_HPP
#define OAAUDIT_PIPELINE_HPP

#include <string>
#include <vector>

#include "oaaudit/ingest.hpp"

namespace oa::pipeline {

/// Everything a full audit needs. Stage subcommands use the subset they need
/// and validate it themselves, so e.g. `harvest` does not demand export files.
struct AuditConfig {
    std::vector<std::string> institutions; // acronyms, or the single word "all"
    int year_from = 0;
    int year_to = 0;
    std::vector<std::string> published_inputs;
    std::string published_format = "auto"; // auto | tagged | delimited
    std::string fixtures_dir;              // harvest from recorded pages
    std::string endpoint;                  // or from a live http endpoint
    std::string profiles_path;
    std::string policies_path;
    std::string romeo_path;
    std::string terms_path; // empty → built-in default list
    std::string audit_date; // YYYY-MM-DD, optional
    double threshold = 0.90;
    std::string out_dir = "out";
    std::string format = "delimited"; // report format: delimited | structured
    int jobs = 1;
    int page_size = 1000; // harvest pagination
    int max_retries = 3;
    int backoff_ms = 100;
    int fetch_parallelism = 2;
};

/// Validated runtime context: the institution profiles actually selected, in
/// report (acronym) order.
struct AuditContext {
    AuditConfig config;
    std::vector<ingest::InstitutionProfile> profiles;
};

/// Resolves "all", rejects unknown or duplicate acronyms, checks the window
/// and threshold, loads profiles, and creates the output directory.
AuditContext validate(const AuditConfig& config);

/// Parse exports, attribute records to institutions, classify funding; writes
/// published.json. Dry runs only print per-institution record counts.
void stage_ingest(const AuditContext& ctx, bool dry_run = false);

/// Fetch and window-filter deposits for every selected target; writes
/// deposits.json.
void stage_harvest(const AuditContext& ctx);

/// Dedup deposits, classify rights, link, and propose near misses; writes
/// matches.json and review_queue.tsv.
void stage_match(const AuditContext& ctx);

/// Tally, compute indices, and emit the report plus merged diagnostics.
void stage_report(const AuditContext& ctx);

/// The four stages in order over the same context; staged and end-to-end
/// execution are the same code and produce the same bytes.
void run_audit(const AuditContext& ctx);

} // namespace oa::pipeline

#endif
