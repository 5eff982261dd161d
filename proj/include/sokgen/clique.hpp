#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <vector>

namespace sokgen {

/// Undirected graph over vertices 0..n-1 stored as adjacency bitsets.
class Graph {
  public:
    explicit Graph(std::size_t n) : n_(n), words_((n + 63) / 64), adj_(n * words_, 0) {}

    std::size_t size() const noexcept { return n_; }
    std::size_t words() const noexcept { return words_; }

    void add_edge(std::size_t a, std::size_t b) {
        if (a == b) return;
        adj_[a * words_ + b / 64] |= std::uint64_t{1} << (b % 64);
        adj_[b * words_ + a / 64] |= std::uint64_t{1} << (a % 64);
    }

    bool has_edge(std::size_t a, std::size_t b) const { return adj_[a * words_ + b / 64] >> (b % 64) & 1; }

    const std::uint64_t* row(std::size_t v) const { return &adj_[v * words_]; }

  private:
    std::size_t n_;
    std::size_t words_;
    std::vector<std::uint64_t> adj_;
};

struct CliqueResult {
    std::vector<std::size_t> members;  // ascending
    long iterations = 0;
    bool capped = false;
};

namespace detail {

class CliqueSearch {
  public:
    CliqueSearch(const Graph& g, long cap) : g_(g), cap_(cap) {}

    CliqueResult run() {
        const std::size_t words = g_.words();
        std::vector<std::uint64_t> all(words, 0);
        for (std::size_t v = 0; v < g_.size(); ++v) all[v / 64] |= std::uint64_t{1} << (v % 64);
        if (g_.size() > 0) expand(all);
        std::sort(best_.begin(), best_.end());
        return {best_, iterations_, capped_};
    }

  private:
    static std::size_t count(const std::vector<std::uint64_t>& set) {
        std::size_t n = 0;
        for (auto w : set) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    std::size_t count_common(const std::vector<std::uint64_t>& set, std::size_t v) const {
        const std::uint64_t* row = g_.row(v);
        std::size_t n = 0;
        for (std::size_t i = 0; i < set.size(); ++i) n += static_cast<std::size_t>(std::popcount(set[i] & row[i]));
        return n;
    }

    // One call is one iteration. Returns false once the cap stops the search.
    bool expand(std::vector<std::uint64_t> candidates) {
        if (iterations_ >= cap_) {
            capped_ = true;
            return false;
        }
        ++iterations_;
        if (current_.size() > best_.size()) best_ = current_;

        std::size_t remaining = count(candidates);
        if (remaining == 0 || current_.size() + remaining <= best_.size()) return true;

        // Pivot: the candidate with the most neighbours among the candidates.
        std::size_t pivot = 0;
        std::size_t pivot_degree = 0;
        bool have_pivot = false;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            for (std::uint64_t w = candidates[i]; w; w &= w - 1) {
                const std::size_t v = i * 64 + static_cast<std::size_t>(std::countr_zero(w));
                const std::size_t d = count_common(candidates, v);
                if (!have_pivot || d > pivot_degree) {
                    pivot = v;
                    pivot_degree = d;
                    have_pivot = true;
                }
            }
        }

        std::vector<std::uint64_t> branch(candidates.size());
        const std::uint64_t* pivot_row = g_.row(pivot);
        for (std::size_t i = 0; i < candidates.size(); ++i) branch[i] = candidates[i] & ~pivot_row[i];

        std::vector<std::uint64_t> next(candidates.size());
        for (std::size_t i = 0; i < branch.size(); ++i) {
            for (std::uint64_t w = branch[i]; w; w &= w - 1) {
                if (current_.size() + remaining <= best_.size()) return true;
                const std::size_t v = i * 64 + static_cast<std::size_t>(std::countr_zero(w));
                const std::uint64_t* row = g_.row(v);
                for (std::size_t j = 0; j < candidates.size(); ++j) next[j] = candidates[j] & row[j];
                current_.push_back(v);
                const bool finished = expand(next);
                current_.pop_back();
                if (!finished) return false;
                candidates[i] &= ~(std::uint64_t{1} << (v % 64));
                --remaining;
            }
        }
        return true;
    }

    const Graph& g_;
    long cap_;
    long iterations_ = 0;
    bool capped_ = false;
    std::vector<std::size_t> current_;
    std::vector<std::size_t> best_;
};

}  // namespace detail

/// Branch-and-bound maximum clique with pivoting. Each recursive expansion
/// counts as one iteration; at `iteration_cap` the search stops and the
/// largest clique seen so far is returned with `capped` set.
inline CliqueResult max_clique(const Graph& g, long iteration_cap = 1'000'000) {
    return detail::CliqueSearch(g, iteration_cap).run();
}

}  // namespace sokgen
