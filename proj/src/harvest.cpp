#include "oaaudit/harvest.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>

#include "oaaudit/errors.hpp"
#include "oaaudit/text.hpp"
#include "oaaudit/xml.hpp"

namespace oa::harvest {

namespace fs = std::filesystem;

namespace {

std::optional<int> year_from_date(std::string_view date) {
    // First 4-digit run in a plausible range; formats in the wild vary.
    for (std::size_t i = 0; i + 4 <= date.size(); ++i) {
        bool four = true;
        for (std::size_t j = 0; j < 4 && four; ++j)
            four = std::isdigit(static_cast<unsigned char>(date[i + j]));
        if (!four) continue;
        if (i + 4 < date.size() && std::isdigit(static_cast<unsigned char>(date[i + 4])))
            continue;
        if (i > 0 && std::isdigit(static_cast<unsigned char>(date[i - 1]))) continue;
        int y = (date[i] - '0') * 1000 + (date[i + 1] - '0') * 100 +
                (date[i + 2] - '0') * 10 + (date[i + 3] - '0');
        if (y >= 1500 && y <= 2100) return y;
    }
    return std::nullopt;
}

long attr_long(const xml::Element& el, std::string_view name, long fallback) {
    const std::string* v = el.attr(name);
    if (!v) return fallback;
    try {
        return std::stol(*v);
    } catch (...) {
        return fallback;
    }
}

std::string trimmed(std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

struct ParsedEndpoint {
    std::string host;
    int port = 80;
    std::string path; // always non-empty, starts with '/'
};

ParsedEndpoint split_http_endpoint(const std::string& endpoint) {
    std::string rest = endpoint.substr(endpoint.find("://") + 3);
    ParsedEndpoint out;
    std::size_t slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : rest.substr(slash);
    std::size_t colon = hostport.rfind(':');
    if (colon == std::string::npos) {
        out.host = hostport;
    } else {
        out.host = hostport.substr(0, colon);
        try {
            out.port = std::stoi(hostport.substr(colon + 1));
        } catch (...) {
            throw ConfigError("bad endpoint port in " + endpoint);
        }
    }
    if (out.host.empty()) throw ConfigError("bad endpoint address: " + endpoint);
    return out;
}

bool transient_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

// One page fetch with retry budget. Returns the raw document body.
class PageSource {
public:
    PageSource(const EndpointConfig& cfg, const HarvestRequest& req)
        : cfg_(cfg), query_(build_query(req)), target_(req.target) {
        http_ = cfg.endpoint.rfind("http://", 0) == 0;
        if (cfg.endpoint.rfind("https://", 0) == 0)
            throw ConfigError("https endpoints are not supported; use http or fixtures");
        if (http_) parsed_ = split_http_endpoint(cfg_.endpoint);
    }

    // retries_out is incremented once per retry that was needed.
    std::string get(long offset, std::uint64_t& retries_out) const {
        if (!http_) return read_fixture(offset);
        std::string path = parsed_.path + "?" + query_;
        if (offset > 0) path += "&offset=" + std::to_string(offset);
        std::string last_error;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0) {
                ++retries_out;
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(static_cast<long>(cfg_.backoff_ms) * attempt));
            }
            httplib::Client client(parsed_.host, parsed_.port);
            client.set_connection_timeout(10);
            client.set_read_timeout(30);
            httplib::Result res = client.Get(path);
            if (!res) {
                last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
                continue;
            }
            if (res->status == 200) return res->body;
            last_error = "status " + std::to_string(res->status);
            if (!transient_status(res->status)) break;
        }
        throw HarvestError("harvest failed for target " + target_ + " at offset " +
                           std::to_string(offset) + ": " + last_error);
    }

private:
    std::string read_fixture(long offset) const {
        fs::path file = fs::path(cfg_.endpoint) / target_ / (std::to_string(offset) + ".xml");
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw HarvestError("harvest fixture missing for target " + target_ +
                               " at offset " + std::to_string(offset) + ": " + file.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    EndpointConfig cfg_;
    std::string query_;
    std::string target_;
    bool http_ = false;
    ParsedEndpoint parsed_;
};

void collapse_duplicates(std::vector<HarvestPage>& pages, Diagnostics& diag) {
    std::unordered_set<std::string> seen;
    std::uint64_t collapsed = 0;
    for (HarvestPage& page : pages) {
        std::vector<RepoRecord> kept;
        kept.reserve(page.records.size());
        for (RepoRecord& rec : page.records) {
            bool dup = false;
            for (const std::string& id : rec.identifiers)
                if (seen.count(id)) dup = true;
            if (dup) {
                ++collapsed;
                continue;
            }
            for (const std::string& id : rec.identifiers) seen.insert(id);
            kept.push_back(std::move(rec));
        }
        page.records = std::move(kept);
    }
    if (collapsed) diag.count("harvest.duplicates_collapsed", collapsed);
}

} // namespace

std::vector<std::string> HarvestRequest::default_fields() {
    return {"dc:title",      "dc:creator", "dc:contributor", "dc:date",
            "dc:identifier", "dc:relation", "dc:rights",     "dc:type"};
}

std::string build_query(const HarvestRequest& req) {
    std::string q = "func=PerformSearch&target=" + req.target + "&query=dcyear:[" +
                    std::to_string(req.year_from) + "+TO+" + std::to_string(req.year_to) +
                    "]&doctype:" + req.doc_type_code;
    if (req.page_size) q += "&hits=" + std::to_string(*req.page_size);
    q += "&fields=";
    for (std::size_t i = 0; i < req.fields.size(); ++i) {
        if (i) q += ",";
        q += req.fields[i];
    }
    return q;
}

HarvestPage parse_page(std::string_view document, std::string_view target,
                       Diagnostics& diag) {
    xml::Element root = xml::parse(document);
    const xml::Element* result = root.name == "result" ? &root : root.first("result");
    if (!result) throw std::runtime_error("xml: no result element in response document");

    HarvestPage page;
    page.offset = attr_long(*result, "offset", 0);
    page.total_reported = attr_long(*result, "total", 0);

    long slot = -1;
    for (const xml::Element& rec_el : result->children) {
        if (rec_el.name != "record") continue;
        ++slot;
        RepoRecord rec;
        rec.source_target = std::string(target);
        rec.uid = std::string(target) + "#" + std::to_string(page.offset + slot);
        for (const xml::Element& f : rec_el.children) {
            std::string value = trimmed(f.text);
            if (f.name == "dc:title") {
                if (!rec.title.empty() && !value.empty()) rec.title += " ";
                rec.title += value;
            } else if (f.name == "dc:creator") {
                rec.creators.push_back(value);
            } else if (f.name == "dc:contributor") {
                rec.contributors.push_back(value);
            } else if (f.name == "dc:date") {
                if (!rec.year) rec.year = year_from_date(value);
            } else if (f.name == "dc:identifier") {
                if (!value.empty()) rec.identifiers.push_back(value);
            } else if (f.name == "dc:relation") {
                rec.relations.push_back(value);
            } else if (f.name == "dc:rights") {
                rec.rights_raw.push_back(value);
            } else if (f.name == "dc:type") {
                if (!rec.doc_type_raw.empty() && !value.empty()) rec.doc_type_raw += "; ";
                rec.doc_type_raw += value;
            }
        }
        rec.title = trimmed(rec.title);
        if (rec.title.empty()) {
            diag.count("harvest.quarantined_titleless");
            continue;
        }
        page.records.push_back(std::move(rec));
    }
    return page;
}

std::vector<RepoRecord> parse_dc(std::string_view document, std::string_view target,
                                 Diagnostics& diag) {
    return parse_page(document, target, diag).records;
}

std::string serialize_page(const HarvestPage& page) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<response>\n  <result total=\"" << page.total_reported << "\" offset=\""
        << page.offset << "\">\n";
    auto field = [&out](const char* name, const std::string& value) {
        out << "      <" << name << ">" << xml::escape(value) << "</" << name << ">\n";
    };
    for (const RepoRecord& rec : page.records) {
        out << "    <record>\n";
        field("dc:title", rec.title);
        for (const auto& v : rec.creators) field("dc:creator", v);
        for (const auto& v : rec.contributors) field("dc:contributor", v);
        if (rec.year) field("dc:date", std::to_string(*rec.year));
        for (const auto& v : rec.identifiers) field("dc:identifier", v);
        for (const auto& v : rec.relations) field("dc:relation", v);
        for (const auto& v : rec.rights_raw) field("dc:rights", v);
        if (!rec.doc_type_raw.empty()) field("dc:type", rec.doc_type_raw);
        out << "    </record>\n";
    }
    out << "  </result>\n</response>\n";
    return out.str();
}

std::vector<HarvestPage> fetch_all(const EndpointConfig& endpoint, const HarvestRequest& req,
                                   Diagnostics& diag) {
    PageSource source(endpoint, req);
    std::uint64_t retries = 0;

    auto fetch_parse = [&](long offset, Diagnostics& d,
                           std::uint64_t& retry_slot) -> std::optional<HarvestPage> {
        std::string body = source.get(offset, retry_slot);
        try {
            HarvestPage page = parse_page(body, req.target, d);
            page.offset = offset; // trust the request position, not the payload
            return page;
        } catch (const std::exception&) {
            d.count("harvest.pages_skipped");
            return std::nullopt;
        }
    };

    std::vector<HarvestPage> pages;
    std::optional<HarvestPage> first = fetch_parse(0, diag, retries);
    if (!first) {
        // Without page 0 there is no total; nothing to iterate.
        if (retries) diag.count("harvest.retries", retries);
        return pages;
    }
    long total = first->total_reported;
    pages.push_back(std::move(*first));

    if (req.page_size) {
        long step = *req.page_size;
        std::vector<long> offsets;
        for (long off = step; off < total; off += step) offsets.push_back(off);

        std::vector<std::optional<HarvestPage>> slots(offsets.size());
        std::vector<Diagnostics> diags(offsets.size());
        std::vector<std::uint64_t> retry_counts(offsets.size(), 0);
        int workers = std::max(1, std::min<int>(endpoint.parallelism,
                                                static_cast<int>(offsets.size())));
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;

        auto work = [&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= offsets.size()) return;
                try {
                    slots[i] = fetch_parse(offsets[i], diags[i], retry_counts[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> threads;
            for (int w = 0; w < workers; ++w) threads.emplace_back(work);
            for (std::thread& t : threads) t.join();
        }
        if (first_error) std::rethrow_exception(first_error);

        for (std::size_t i = 0; i < offsets.size(); ++i) {
            diag.merge(diags[i]);
            retries += retry_counts[i];
            if (slots[i]) pages.push_back(std::move(*slots[i]));
        }
    } else {
        // Unknown page size: advance by records seen; must stay sequential.
        long seen = static_cast<long>(pages[0].records.size());
        while (seen < total) {
            std::optional<HarvestPage> page = fetch_parse(seen, diag, retries);
            if (!page || page->records.empty()) {
                if (page) diag.count("harvest.empty_page_stall");
                break; // cannot advance further
            }
            seen += static_cast<long>(page->records.size());
            pages.push_back(std::move(*page));
        }
    }

    if (retries) diag.count("harvest.retries", retries);
    collapse_duplicates(pages, diag);
    return pages;
}

std::vector<RepoRecord> filter_articles(std::vector<RepoRecord> records, int year_from,
                                        int year_to, Diagnostics& diag) {
    std::vector<RepoRecord> out;
    out.reserve(records.size());
    for (RepoRecord& rec : records) {
        std::vector<std::string> toks = text::tokenize(rec.doc_type_raw);
        bool is_article = rec.doc_type_raw == "121";
        for (const std::string& t : toks)
            is_article = is_article || t == "article" || t == "121";
        if (!is_article) {
            diag.count("harvest.non_articles");
            continue;
        }
        if (!rec.year) {
            diag.count("harvest.quarantined_yearless");
            continue;
        }
        if (*rec.year < year_from || *rec.year > year_to) {
            diag.count("harvest.year_outside_window");
            continue;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace oa::harvest
