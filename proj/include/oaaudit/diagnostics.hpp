#ifndef OAAUDIT_DIAGNOSTICS_HPP
#define OAAUDIT_DIAGNOSTICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace oa {

/// Aggregated counters for non-fatal oddities (skipped records, collapsed
/// duplicates, retried fetches, ...). Counts only, keyed by category, so the
/// tally is independent of input order and safe to diff between runs.
class Diagnostics {
public:
    void count(std::string_view category, std::uint64_t n = 1) {
        counts_[std::string(category)] += n;
    }

    std::uint64_t get(std::string_view category) const {
        auto it = counts_.find(std::string(category));
        return it == counts_.end() ? 0 : it->second;
    }

    /// Ordered by category name; iteration order is the report order.
    const std::map<std::string, std::uint64_t>& counts() const { return counts_; }

    void merge(const Diagnostics& other) {
        for (const auto& [k, v] : other.counts_) counts_[k] += v;
    }

    bool empty() const { return counts_.empty(); }

private:
    std::map<std::string, std::uint64_t> counts_;
};

} // namespace oa

#endif
