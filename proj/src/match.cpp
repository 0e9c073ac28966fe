#include "oaaudit/match.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "oaaudit/errors.hpp"
#include "oaaudit/policy.hpp"
#include "oaaudit/text.hpp"

namespace oa::match {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Openness of a deposit, for survivor selection.
int openness(const harvest::RepoRecord& rec) {
    static const policy::Date kSentinel{9999, 12, 31};
    return policy::rank(policy::classify_rights(rec, kSentinel).kind);
}

int populated_fields(const harvest::RepoRecord& rec) {
    int n = 0;
    n += !rec.title.empty();
    n += !rec.creators.empty();
    n += !rec.contributors.empty();
    n += rec.year.has_value();
    n += !rec.identifiers.empty();
    n += !rec.relations.empty();
    n += !rec.rights_raw.empty();
    n += !rec.doc_type_raw.empty();
    return n;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Per-published candidate lists, computed in a read-only pass.
struct Candidates {
    std::vector<std::uint32_t> by_doi;   // deposit indices, equal doi + equal year
    std::vector<std::uint32_t> by_title; // deposit indices, equal key + equal year
    bool year_checked = false;           // some deposit shared the doi or the key
};

} // namespace

std::optional<std::string> canonical_doi(std::string_view raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    std::string low = text::fold(s);
    static const char* kPrefixes[] = {
        "https://doi.org/", "http://doi.org/",  "https://dx.doi.org/",
        "http://dx.doi.org/", "info:doi/", "urn:doi:", "doi:",
    };
    for (const char* p : kPrefixes) {
        if (low.rfind(p, 0) == 0) {
            low = trim(low.substr(std::string_view(p).size()));
            break;
        }
    }
    if (low.rfind("10.", 0) != 0) return std::nullopt;
    return low;
}

std::optional<std::string> deposit_doi(const harvest::RepoRecord& record) {
    for (const std::string& id : record.identifiers)
        if (auto doi = canonical_doi(id)) return doi;
    return std::nullopt;
}

std::vector<harvest::RepoRecord> dedup_within_institution(
    std::vector<harvest::RepoRecord> records, Diagnostics* diag) {
    for (const harvest::RepoRecord& rec : records)
        if (rec.source_target != records.front().source_target)
            throw IntegrityError("dedup input mixes targets " +
                                 records.front().source_target + " and " + rec.source_target);
    if (records.size() < 2) return records;

    UnionFind uf(records.size());
    std::unordered_map<std::string, std::size_t> first_by_doi, first_by_key;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (auto doi = deposit_doi(records[i])) {
            auto [it, inserted] = first_by_doi.emplace(*doi, i);
            if (!inserted) uf.unite(i, it->second);
        }
        std::string key = text::normalize_title(records[i].title);
        if (!key.empty() && records[i].year) {
            key += '\x1f';
            key += std::to_string(*records[i].year);
            auto [it, inserted] = first_by_key.emplace(key, i);
            if (!inserted) uf.unite(i, it->second);
        }
    }

    // Pick one survivor per group: most open, then most populated, then first.
    std::unordered_map<std::size_t, std::size_t> survivor;
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::size_t root = uf.find(i);
        auto it = survivor.find(root);
        if (it == survivor.end()) {
            survivor.emplace(root, i);
            continue;
        }
        std::size_t cur = it->second;
        int oi = openness(records[i]), oc = openness(records[cur]);
        if (oi > oc || (oi == oc && populated_fields(records[i]) > populated_fields(records[cur])))
            it->second = i;
    }

    std::vector<harvest::RepoRecord> out;
    out.reserve(survivor.size());
    std::uint64_t removed = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (survivor.at(uf.find(i)) == i) out.push_back(std::move(records[i]));
        else ++removed;
    }
    if (diag && removed) diag->count("match.duplicates_removed", removed);
    return out;
}

std::vector<MatchOutcome> link(std::span<const ingest::PublishedRecord> published,
                               std::span<const harvest::RepoRecord> deposits, int jobs) {
    // Deposit-side indexes, in input order.
    std::unordered_map<std::string, std::vector<std::uint32_t>> doi_index, title_index;
    std::vector<std::optional<int>> dep_year(deposits.size());
    for (std::size_t j = 0; j < deposits.size(); ++j) {
        dep_year[j] = deposits[j].year;
        if (auto doi = deposit_doi(deposits[j]))
            doi_index[*doi].push_back(static_cast<std::uint32_t>(j));
        std::string key = text::normalize_title(deposits[j].title);
        if (!key.empty()) title_index[key].push_back(static_cast<std::uint32_t>(j));
    }

    std::vector<Candidates> cands(published.size());
    auto compute = [&](std::size_t i) {
        const ingest::PublishedRecord& pub = published[i];
        Candidates c;
        if (pub.doi) {
            auto it = doi_index.find(*pub.doi);
            if (it != doi_index.end()) {
                c.year_checked = true;
                for (std::uint32_t j : it->second)
                    if (dep_year[j] && *dep_year[j] == pub.year) c.by_doi.push_back(j);
            }
        }
        std::string key = text::normalize_title(pub.title);
        if (!key.empty()) {
            auto it = title_index.find(key);
            if (it != title_index.end()) {
                c.year_checked = true;
                for (std::uint32_t j : it->second)
                    if (dep_year[j] && *dep_year[j] == pub.year) c.by_title.push_back(j);
            }
        }
        cands[i] = std::move(c);
    };

#ifdef _OPENMP
    if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 256) num_threads(jobs)
        for (long i = 0; i < static_cast<long>(published.size()); ++i)
            compute(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < published.size(); ++i) compute(i);
    }
#else
    (void)jobs;
    for (std::size_t i = 0; i < published.size(); ++i) compute(i);
#endif

    // Claiming must stay sequential in published order for determinism.
    std::vector<char> claimed(deposits.size(), 0);
    std::vector<MatchOutcome> out(published.size());
    for (std::size_t i = 0; i < published.size(); ++i) {
        MatchOutcome& o = out[i];
        o.published_uid = published[i].uid;
        o.year_checked = cands[i].year_checked;
        for (std::uint32_t j : cands[i].by_doi) {
            if (!claimed[j]) {
                claimed[j] = 1;
                o.deposit_uid = deposits[j].uid;
                o.basis = MatchBasis::Doi;
                break;
            }
        }
        if (o.basis != MatchBasis::None) continue;
        for (std::uint32_t j : cands[i].by_title) {
            if (!claimed[j]) {
                claimed[j] = 1;
                o.deposit_uid = deposits[j].uid;
                o.basis = MatchBasis::Title;
                break;
            }
        }
    }
    return out;
}

std::vector<ReviewCandidate> review_queue(
    std::span<const ingest::PublishedRecord> published_unmatched,
    std::span<const harvest::RepoRecord> deposits_unlinked, double threshold, int jobs) {
    std::vector<std::string> dep_keys(deposits_unlinked.size());
    for (std::size_t j = 0; j < deposits_unlinked.size(); ++j)
        dep_keys[j] = text::normalize_title(deposits_unlinked[j].title);

    std::vector<std::vector<ReviewCandidate>> buckets(published_unmatched.size());
    auto scan = [&](std::size_t i) {
        std::string pk = text::normalize_title(published_unmatched[i].title);
        if (pk.empty()) return;
        for (std::size_t j = 0; j < deposits_unlinked.size(); ++j) {
            if (dep_keys[j].empty()) continue;
            double sim = text::similarity(pk, dep_keys[j]);
            if (sim >= threshold && sim < 1.0) {
                ReviewCandidate c;
                c.published_uid = published_unmatched[i].uid;
                c.deposit_uid = deposits_unlinked[j].uid;
                c.published_key = pk;
                c.deposit_key = dep_keys[j];
                c.similarity = sim;
                buckets[i].push_back(std::move(c));
            }
        }
    };

#ifdef _OPENMP
    if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 16) num_threads(jobs)
        for (long i = 0; i < static_cast<long>(published_unmatched.size()); ++i)
            scan(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < published_unmatched.size(); ++i) scan(i);
    }
#else
    (void)jobs;
    for (std::size_t i = 0; i < published_unmatched.size(); ++i) scan(i);
#endif

    std::vector<ReviewCandidate> out;
    for (auto& b : buckets)
        for (ReviewCandidate& c : b) out.push_back(std::move(c));
    std::sort(out.begin(), out.end(), [](const ReviewCandidate& a, const ReviewCandidate& b) {
        if (a.published_key != b.published_key) return a.published_key < b.published_key;
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.deposit_uid != b.deposit_uid) return a.deposit_uid < b.deposit_uid;
        return a.published_uid < b.published_uid;
    });
    return out;
}

} // namespace oa::match
