#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sokgen/level.hpp"
#include "sokgen/solver.hpp"

namespace sokgen {

/// FNV-1a over the canonical serialization, as 16 lowercase hex digits.
inline std::string level_hash(std::string_view canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string level_hash(const Level& level) { return level_hash(serialize(level)); }

struct SolutionCacheEntry {
    std::string level_hash;
    SolveStatus status = SolveStatus::Invalid;
    std::optional<int> solution_len;
    long nodes_expanded = 0;
    long budget = 0;
    bool deadlock_pruning = true;

    friend bool operator==(const SolutionCacheEntry&, const SolutionCacheEntry&) = default;
};

inline nlohmann::ordered_json to_json(const SolutionCacheEntry& e) {
    nlohmann::ordered_json j;
    j["level_hash"] = e.level_hash;
    j["status"] = std::string(to_string(e.status));
    j["solution_len"] = e.solution_len ? nlohmann::ordered_json(*e.solution_len) : nlohmann::ordered_json(nullptr);
    j["nodes_expanded"] = e.nodes_expanded;
    j["budget"] = e.budget;
    j["deadlock_pruning"] = e.deadlock_pruning;
    return j;
}

inline std::optional<SolutionCacheEntry> cache_entry_from_json(const nlohmann::json& j) {
    try {
        SolutionCacheEntry e;
        e.level_hash = j.at("level_hash").get<std::string>();
        auto status = solve_status_from_string(j.at("status").get<std::string>());
        if (!status || e.level_hash.empty()) return std::nullopt;
        e.status = *status;
        if (!j.at("solution_len").is_null()) e.solution_len = j.at("solution_len").get<int>();
        e.nodes_expanded = j.at("nodes_expanded").get<long>();
        e.budget = j.at("budget").get<long>();
        e.deadlock_pruning = j.value("deadlock_pruning", true);
        if (e.status == SolveStatus::Solved && !e.solution_len) return std::nullopt;
        return e;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

/// Append-only store of solver outcomes keyed by level hash, persisted as one
/// JSON object per line. Any number of threads may call get/put; appends are
/// serialized. An empty path keeps the cache in memory only.
class SolutionCache {
  public:
    SolutionCache() = default;

    explicit SolutionCache(std::string path) : path_(std::move(path)) {
        if (path_.empty()) return;
        std::ifstream in(path_);
        if (!in) return;  // a missing file is an empty cache
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto parsed = nlohmann::json::parse(line, nullptr, false);
            auto entry = parsed.is_discarded() ? std::nullopt : cache_entry_from_json(parsed);
            if (!entry) {
                warnings_.push_back(path_ + ":" + std::to_string(line_no) + ": skipped corrupted cache line");
                continue;
            }
            entries_[entry->level_hash].push_back(*entry);
        }
    }

    /// Answer for a solve with the given budget, if one can be derived from a
    /// stored entry. Search is deterministic, so a finished search answers any
    /// budget: below its expansion count it would have run out.
    std::optional<SolutionCacheEntry> get(const std::string& hash, long budget, bool deadlock_pruning = true) const {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(hash);
        if (it == entries_.end()) return std::nullopt;
        for (auto entry : it->second) {
            if (entry.deadlock_pruning != deadlock_pruning) continue;
            const bool finished = entry.status == SolveStatus::Solved || entry.status == SolveStatus::ProvedUnsolvable ||
                                  entry.status == SolveStatus::Invalid;
            if (finished) {
                if (entry.nodes_expanded > budget) {
                    entry.status = SolveStatus::ExhaustedBudget;
                    entry.solution_len.reset();
                    entry.nodes_expanded = budget;
                }
                entry.budget = budget;
                return entry;
            }
            if (entry.status == SolveStatus::ExhaustedBudget && entry.budget >= budget) {
                entry.nodes_expanded = budget;
                entry.budget = budget;
                return entry;
            }
        }
        return std::nullopt;
    }

    void put(const SolutionCacheEntry& entry) {
        std::lock_guard lock(mutex_);
        entries_[entry.level_hash].push_back(entry);
        if (path_.empty()) return;
        std::ofstream out(path_, std::ios::app);
        if (out) out << to_json(entry).dump() << '\n';
        if (!out) warnings_.push_back(path_ + ": failed to append cache entry");
    }

    std::vector<std::string> warnings() const {
        std::lock_guard lock(mutex_);
        return warnings_;
    }

    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
    std::map<std::string, std::vector<SolutionCacheEntry>> entries_;
    std::vector<std::string> warnings_;
    mutable std::mutex mutex_;
};

/// solve() behind the cache. Cache hits carry no move list.
inline SolveResult solve_cached(const Level& level, const SolverConfig& config, SolutionCache* cache) {
    if (!cache) return solve(level, config);
    const std::string hash = level_hash(level);
    if (auto hit = cache->get(hash, config.budget, config.deadlock_pruning)) {
        SolveResult r;
        r.status = hit->status;
        r.solution_len = hit->solution_len;
        r.nodes_expanded = hit->nodes_expanded;
        return r;
    }
    SolveResult r = solve(level, config);
    cache->put({hash, r.status, r.solution_len, r.nodes_expanded, config.budget, config.deadlock_pruning});
    return r;
}

}  // namespace sokgen
