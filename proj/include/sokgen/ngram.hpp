#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sokgen/annotation.hpp"

namespace sokgen {

/// Frame markers. Neither can appear in level or annotation text.
inline constexpr char kStartSymbol = '\x02';
inline constexpr char kEndSymbol = '\x03';

class EmptyCorpus : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class PromptVocabularyMismatch : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationParams {
    double temperature = 1.0;  // 0 selects greedy argmax
    double top_p = 1.0;
    int beams = 1;
    int max_chars = 256;
    std::uint64_t seed = 0;
};

inline void validate_params(const GenerationParams& p) {
    if (!(p.temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (!(p.top_p > 0.0 && p.top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
    if (p.beams < 1) throw std::invalid_argument("beams must be >= 1");
    if (p.max_chars < 1) throw std::invalid_argument("max_chars must be >= 1");
}

/// (symbol, probability) pairs.
using Distribution = std::vector<std::pair<char, double>>;

/// Character n-gram counts for every context length 0..order. Contexts are
/// stored by a 64-bit hash of their characters in a sorted table.
class NGramModel {
  public:
    struct Count {
        char symbol;
        std::uint32_t count;
    };

    static NGramModel train(const std::vector<std::string>& texts, int order) {
        if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
        if (texts.empty()) throw EmptyCorpus("cannot train an n-gram model on an empty corpus");

        NGramModel model;
        model.order_ = order;
        model.vocabulary_ = {kStartSymbol, kEndSymbol};
        std::size_t annotated = 0;

        struct Event {
            std::uint64_t key;
            char symbol;
            bool operator<(const Event& o) const { return key != o.key ? key < o.key : symbol < o.symbol; }
        };
        std::vector<Event> events;
        for (const auto& text : texts) {
            const auto annotation = split_annotation(text).first;
            if (!annotation.empty()) {
                ++annotated;
                model.annotation_pool_.push_back(annotation);
            }
            const std::string framed = std::string(static_cast<std::size_t>(order), kStartSymbol) + text + kEndSymbol;
            for (char ch : text) model.vocabulary_.insert(ch);
            for (std::size_t pos = static_cast<std::size_t>(order); pos < framed.size(); ++pos) {
                std::uint64_t h = context_seed();
                events.push_back({h, framed[pos]});
                for (int len = 1; len <= order; ++len) {
                    h = extend(h, framed[pos - static_cast<std::size_t>(len)]);
                    events.push_back({h, framed[pos]});
                }
            }
        }
        model.annotated_ = annotated == texts.size();
        if (!model.annotated_) model.annotation_pool_.clear();

        std::sort(events.begin(), events.end());
        for (std::size_t i = 0; i < events.size();) {
            const std::uint64_t key = events[i].key;
            model.keys_.push_back(key);
            model.offsets_.push_back(static_cast<std::uint32_t>(model.counts_.size()));
            std::uint32_t total = 0;
            while (i < events.size() && events[i].key == key) {
                const char symbol = events[i].symbol;
                std::uint32_t n = 0;
                for (; i < events.size() && events[i].key == key && events[i].symbol == symbol; ++i) ++n;
                model.counts_.push_back({symbol, n});
                total += n;
            }
            model.totals_.push_back(total);
        }
        model.offsets_.push_back(static_cast<std::uint32_t>(model.counts_.size()));
        return model;
    }

    int order() const noexcept { return order_; }
    const std::set<char>& vocabulary() const noexcept { return vocabulary_; }
    bool annotated() const noexcept { return annotated_; }
    const std::vector<Annotation>& annotation_pool() const noexcept { return annotation_pool_; }
    std::size_t context_count() const noexcept { return keys_.size(); }

    /// Exact counts observed after `context` (at most `order` characters),
    /// sorted by symbol. Empty when the context was never seen.
    std::vector<Count> counts(std::string_view context) const {
        const auto idx = find(hash_context(context));
        if (!idx) return {};
        return {counts_.begin() + offsets_[*idx], counts_.begin() + offsets_[*idx + 1]};
    }

    /// Total observations after `context`.
    std::uint32_t context_total(std::string_view context) const {
        const auto idx = find(hash_context(context));
        return idx ? totals_[*idx] : 0;
    }

    /// Empirical next-symbol distribution, backing off to the longest suffix
    /// of `context` (up to `order` characters) that was seen in training.
    Distribution next_distribution(std::string_view context) const {
        if (context.size() > static_cast<std::size_t>(order_)) context = context.substr(context.size() - order_);
        for (std::size_t drop = 0; drop <= context.size(); ++drop) {
            const auto idx = find(hash_context(context.substr(drop)));
            if (!idx) continue;
            Distribution dist;
            const double total = totals_[*idx];
            for (auto i = offsets_[*idx]; i < offsets_[*idx + 1]; ++i) {
                dist.emplace_back(counts_[i].symbol, counts_[i].count / total);
            }
            return dist;
        }
        return {};
    }

  private:
    static std::uint64_t context_seed() { return 0x51ed270b27a3a8b1ULL; }

    static std::uint64_t extend(std::uint64_t h, char ch) {
        h ^= static_cast<unsigned char>(ch) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdULL;
        return h ^ (h >> 33);
    }

    // Hash of a context read right to left, matching the training order.
    static std::uint64_t hash_context(std::string_view context) {
        std::uint64_t h = context_seed();
        for (auto it = context.rbegin(); it != context.rend(); ++it) h = extend(h, *it);
        return h;
    }

    std::optional<std::size_t> find(std::uint64_t key) const {
        auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
        if (it == keys_.end() || *it != key) return std::nullopt;
        return static_cast<std::size_t>(it - keys_.begin());
    }

    int order_ = 1;
    bool annotated_ = false;
    std::set<char> vocabulary_;
    std::vector<Annotation> annotation_pool_;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> offsets_;
    std::vector<std::uint32_t> totals_;
    std::vector<Count> counts_;
};

// ---------------------------------------------------------------------------
// Sampling

/// p_i^(1/T), renormalized. T == 0 keeps only the most probable symbol
/// (lowest symbol on ties).
inline Distribution apply_temperature(Distribution dist, double temperature) {
    if (dist.empty()) return dist;
    if (temperature == 0.0) {
        auto best = dist.begin();
        for (auto it = dist.begin(); it != dist.end(); ++it) {
            if (it->second > best->second || (it->second == best->second && it->first < best->first)) best = it;
        }
        return {{best->first, 1.0}};
    }
    double max_log = -INFINITY;
    for (const auto& [s, p] : dist) max_log = std::max(max_log, std::log(p));
    double total = 0.0;
    for (auto& [s, p] : dist) {
        p = std::exp((std::log(p) - max_log) / temperature);
        total += p;
    }
    for (auto& [s, p] : dist) p /= total;
    return dist;
}

/// Keeps the smallest probability-sorted prefix whose mass reaches top_p
/// (the symbol crossing the threshold is kept), renormalized. The result is
/// ordered by descending probability, ties by symbol.
inline Distribution apply_top_p(Distribution dist, double top_p) {
    std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    double mass = 0.0;
    std::size_t keep = 0;
    while (keep < dist.size()) {
        mass += dist[keep].second;
        ++keep;
        if (mass >= top_p - 1e-12) break;
    }
    dist.resize(keep);
    for (auto& [s, p] : dist) p /= mass;
    return dist;
}

namespace detail {

struct SampleRng {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline char draw(const Distribution& dist, double u) {
    double acc = 0.0;
    for (const auto& [s, p] : dist) {
        acc += p;
        if (u < acc) return s;
    }
    return dist.back().first;
}

}  // namespace detail

/// Draws one symbol after temperature scaling and nucleus truncation.
inline char sample_symbol(const Distribution& dist, const GenerationParams& params, std::uint64_t& rng_state) {
    const auto shaped = apply_top_p(apply_temperature(dist, params.temperature), params.top_p);
    detail::SampleRng rng{rng_state};
    const char s = detail::draw(shaped, rng.uniform());
    rng_state = rng.state;
    return s;
}

/// Runs `params.beams` independent sampled continuations of `prompt`, each
/// with its own random stream derived from the seed. Returns the generated
/// text of each beam, excluding the prompt and the end marker.
inline std::vector<std::string> generate(const NGramModel& model, std::string_view prompt,
                                         const GenerationParams& params) {
    validate_params(params);
    std::vector<std::string> out;
    const std::string prefix = std::string(static_cast<std::size_t>(model.order()), kStartSymbol) + std::string(prompt);
    for (int beam = 0; beam < params.beams; ++beam) {
        detail::SampleRng mix{params.seed ^ (0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(beam + 1))};
        std::uint64_t state = mix.next();
        std::string context = prefix;
        std::string text;
        while (static_cast<int>(text.size()) < params.max_chars) {
            const auto dist = model.next_distribution(context);
            if (dist.empty()) break;
            const char s = sample_symbol(dist, params, state);
            if (s == kEndSymbol) break;
            text.push_back(s);
            context.push_back(s);
            if (context.size() > static_cast<std::size_t>(model.order())) context.erase(0, 1);
        }
        out.push_back(std::move(text));
    }
    return out;
}

/// Uniform draw from an annotation pool, determined by the seed.
inline Annotation sample_annotation(const std::vector<Annotation>& pool, std::uint64_t seed) {
    if (pool.empty()) throw PromptVocabularyMismatch("no training annotations to sample a prompt from");
    detail::SampleRng rng{seed ^ 0x6a09e667f3bcc909ULL};
    return pool[rng.next() % pool.size()];
}

/// Generates level bodies conditioned on an annotation prompt. Without an
/// explicit annotation one is drawn from the training annotations using the
/// seed. Throws PromptVocabularyMismatch for a model trained without
/// annotations.
inline std::vector<std::string> generate_controlled(const NGramModel& model, std::optional<Annotation> annotation,
                                                    const GenerationParams& params) {
    if (!model.annotated()) throw PromptVocabularyMismatch("model was trained without annotations");
    if (!annotation) annotation = sample_annotation(model.annotation_pool(), params.seed);
    return generate(model, render_annotation(*annotation), params);
}

}  // namespace sokgen
