#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sokgen/annotation.hpp"
#include "sokgen/cache.hpp"
#include "sokgen/clique.hpp"
#include "sokgen/edit_distance.hpp"
#include "sokgen/level.hpp"
#include "sokgen/parallel.hpp"
#include "sokgen/solver.hpp"

namespace sokgen {

struct DistinctnessConfig {
    int k = 5;
    long clique_iteration_cap = 1'000'000;
};

struct Tolerances {
    double prop_empty = 0.01;
    int solution_len = 5;
};

/// Text used for distance computations: leading annotation lines removed,
/// canonical serialization when the body parses, otherwise the raw body
/// without trailing line breaks.
inline std::string canonical_sample_text(std::string_view raw) {
    const auto body = split_annotation(raw).second;
    if (auto level = try_parse_level(body)) return serialize(*level);
    std::string out(body);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out;
}

/// Training-set side of the novelty check; distances are computed against
/// the canonical text of every training level.
class NoveltyIndex {
  public:
    NoveltyIndex() = default;
    explicit NoveltyIndex(std::vector<std::string> training_texts) : texts_(std::move(training_texts)) {}

    std::size_t size() const noexcept { return texts_.size(); }
    const std::vector<std::string>& texts() const noexcept { return texts_; }

    /// Minimum edit distance to any training text; -1 for an empty index.
    int min_distance(std::string_view sample) const {
        if (texts_.empty()) return -1;
        const EditDistancePattern pattern(sample);
        int best = std::numeric_limits<int>::max();
        for (const auto& t : texts_) {
            // |len(a) - len(b)| bounds the distance from below.
            const auto gap = static_cast<int>(t.size() > sample.size() ? t.size() - sample.size()
                                                                       : sample.size() - t.size());
            if (gap >= best) continue;
            best = std::min(best, pattern.distance(t));
            if (best == 0) break;
        }
        return best;
    }

  private:
    std::vector<std::string> texts_;
};

struct NoveltyResult {
    bool novel = false;
    int min_distance = -1;
};

/// Novel iff the closest training level is at least k edits away. With no
/// training levels every sample is novel and min_distance is -1.
inline NoveltyResult is_novel(std::string_view sample, const NoveltyIndex& training, int k) {
    const int d = training.min_distance(canonical_sample_text(sample));
    return {d < 0 || d >= k, d};
}

/// Parses without padding, checks validity, then solves within budget.
inline std::optional<SolveResult> playability(std::string_view sample, const SolverConfig& config,
                                              SolutionCache* cache = nullptr) {
    auto level = try_parse_level(split_annotation(sample).second);
    if (!level || !validate(*level).verdict) return std::nullopt;
    return solve_cached(*level, config, cache);
}

inline bool is_playable(std::string_view sample, const SolverConfig& config, SolutionCache* cache = nullptr) {
    auto r = playability(sample, config, cache);
    return r && r->status == SolveStatus::Solved;
}

struct DiversityResult {
    double fraction = 0.0;
    std::size_t clique_size = 0;
    bool capped = false;
    long iterations = 0;
};

inline Graph distinctness_graph(const std::vector<std::string>& canonical, int k) {
    Graph g(canonical.size());
    for (std::size_t i = 0; i < canonical.size(); ++i) {
        const EditDistancePattern pattern(canonical[i]);
        for (std::size_t j = i + 1; j < canonical.size(); ++j) {
            if (pattern.distance(canonical[j]) >= k) g.add_edge(i, j);
        }
    }
    return g;
}

inline DiversityResult diversity(const std::vector<std::string>& samples, const DistinctnessConfig& config = {}) {
    if (samples.empty()) return {};
    std::vector<std::string> canonical;
    canonical.reserve(samples.size());
    for (const auto& s : samples) canonical.push_back(canonical_sample_text(s));
    const auto clique = max_clique(distinctness_graph(canonical, config.k), config.clique_iteration_cap);
    return {static_cast<double>(clique.members.size()) / static_cast<double>(samples.size()), clique.members.size(),
            clique.capped, clique.iterations};
}

/// Whether a solved sample matches each field present in the prompt.
/// Returns nullopt for an empty prompt.
inline std::optional<bool> is_accurate(const Level& sample, const Annotation& prompt, const Tolerances& tol,
                                       std::optional<int> solution_len) {
    if (prompt.empty()) return std::nullopt;
    bool ok = true;
    if (prompt.prop_empty_milli) {
        // Compared in exact thousandths so that a difference of exactly the
        // tolerance is accepted.
        const double diff_milli = std::abs(static_cast<double>(count_empty(sample)) * 1000.0 /
                                               static_cast<double>(sample.size()) -
                                           *prompt.prop_empty_milli);
        ok = ok && diff_milli <= tol.prop_empty * 1000.0 + 1e-9;
    }
    if (prompt.solution_len) {
        ok = ok && solution_len && std::abs(*solution_len - *prompt.solution_len) <= tol.solution_len;
    }
    return ok;
}

struct Sample {
    std::optional<Annotation> prompt;
    std::string completion;
};

struct SampleEvaluation {
    std::string text;  // canonical sample text
    bool valid = false;
    bool playable = false;
    bool novel = false;
    std::optional<bool> accurate;
    int min_train_distance = -1;
    SolveStatus solve_status = SolveStatus::Invalid;
    std::optional<int> solution_len;
};

struct EvaluationConfig {
    SolverConfig solver;
    DistinctnessConfig distinctness;
    Tolerances tolerances;
    std::size_t workers = 1;
};

inline SampleEvaluation evaluate_sample(const Sample& sample, const NoveltyIndex& training,
                                        const EvaluationConfig& config, SolutionCache* cache) {
    SampleEvaluation ev;
    ev.text = canonical_sample_text(sample.completion);
    const auto novelty = is_novel(ev.text, training, config.distinctness.k);
    ev.novel = novelty.novel;
    ev.min_train_distance = novelty.min_distance;

    auto level = try_parse_level(split_annotation(sample.completion).second);
    ev.valid = level && validate(*level).verdict;
    if (ev.valid) {
        const auto result = solve_cached(*level, config.solver, cache);
        ev.solve_status = result.status;
        ev.playable = result.status == SolveStatus::Solved;
        ev.solution_len = result.solution_len;
    }
    if (sample.prompt && !sample.prompt->empty()) {
        ev.accurate = ev.playable ? is_accurate(*level, *sample.prompt, config.tolerances, ev.solution_len)
                                  : std::optional<bool>(false);
    }
    return ev;
}

inline std::vector<SampleEvaluation> evaluate_samples(const std::vector<Sample>& samples, const NoveltyIndex& training,
                                                      const EvaluationConfig& config, SolutionCache* cache = nullptr) {
    std::vector<SampleEvaluation> out(samples.size());
    parallel_for(samples.size(), config.workers,
                 [&](std::size_t i) { out[i] = evaluate_sample(samples[i], training, config, cache); });
    return out;
}

struct MetricsReport {
    std::size_t n_samples = 0;
    double novelty = 0.0;
    double playability = 0.0;
    double diversity = 0.0;
    std::optional<double> accuracy;
    double score = 0.0;
    std::optional<double> control_score;
    long clique_iterations_used = 0;
    bool clique_capped = false;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

namespace detail {

// Largest mutually distinct subset among the selected samples.
inline CliqueResult clique_over(const Graph& full, const std::vector<std::size_t>& selected, long cap) {
    Graph sub(selected.size());
    for (std::size_t a = 0; a < selected.size(); ++a) {
        for (std::size_t b = a + 1; b < selected.size(); ++b) {
            if (full.has_edge(selected[a], selected[b])) sub.add_edge(a, b);
        }
    }
    return max_clique(sub, cap);
}

}  // namespace detail

/// Aggregates per-sample flags. Proportions are over all samples; score is
/// the clique over the novel and playable subset divided by the sample
/// count, control score the same over the accurate, novel and playable subset.
inline MetricsReport score(const std::vector<SampleEvaluation>& evaluations, const DistinctnessConfig& config = {}) {
    MetricsReport report;
    report.n_samples = evaluations.size();
    if (evaluations.empty()) return report;
    const double n = static_cast<double>(evaluations.size());

    std::vector<std::string> texts;
    texts.reserve(evaluations.size());
    for (const auto& e : evaluations) texts.push_back(e.text);
    const Graph graph = distinctness_graph(texts, config.k);

    std::vector<std::size_t> all, novel_playable, controlled;
    std::size_t novel = 0, playable = 0, accurate = 0;
    bool prompted = false;
    for (std::size_t i = 0; i < evaluations.size(); ++i) {
        const auto& e = evaluations[i];
        all.push_back(i);
        novel += e.novel;
        playable += e.playable;
        if (e.accurate) {
            prompted = true;
            accurate += *e.accurate;
        }
        if (e.novel && e.playable) {
            novel_playable.push_back(i);
            if (e.accurate.value_or(false)) controlled.push_back(i);
        }
    }

    report.novelty = static_cast<double>(novel) / n;
    report.playability = static_cast<double>(playable) / n;

    auto record = [&](const CliqueResult& c) {
        report.clique_iterations_used += c.iterations;
        report.clique_capped = report.clique_capped || c.capped;
        return static_cast<double>(c.members.size()) / n;
    };
    report.diversity = record(detail::clique_over(graph, all, config.clique_iteration_cap));
    report.score = record(detail::clique_over(graph, novel_playable, config.clique_iteration_cap));
    if (prompted) {
        report.accuracy = static_cast<double>(accurate) / n;
        report.control_score = record(detail::clique_over(graph, controlled, config.clique_iteration_cap));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kMetricsSchema = "sokgen.metrics/1";

inline nlohmann::ordered_json to_json(const MetricsReport& r, std::string_view label = {}) {
    nlohmann::ordered_json j;
    j["schema"] = std::string(kMetricsSchema);
    if (!label.empty()) j["label"] = std::string(label);
    j["n_samples"] = r.n_samples;
    j["novelty"] = r.novelty;
    j["playability"] = r.playability;
    j["diversity"] = r.diversity;
    j["accuracy"] = r.accuracy ? nlohmann::ordered_json(*r.accuracy) : nlohmann::ordered_json(nullptr);
    j["score"] = r.score;
    j["control_score"] = r.control_score ? nlohmann::ordered_json(*r.control_score) : nlohmann::ordered_json(nullptr);
    j["clique_iterations_used"] = r.clique_iterations_used;
    j["clique_capped"] = r.clique_capped;
    return j;
}

class SchemaMismatch : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != kMetricsSchema) {
            throw SchemaMismatch("unsupported schema '" + j.at("schema").get<std::string>() + "'");
        }
        MetricsReport r;
        r.n_samples = j.at("n_samples").get<std::size_t>();
        r.novelty = j.at("novelty").get<double>();
        r.playability = j.at("playability").get<double>();
        r.diversity = j.at("diversity").get<double>();
        if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<double>();
        r.score = j.at("score").get<double>();
        if (!j.at("control_score").is_null()) r.control_score = j.at("control_score").get<double>();
        r.clique_iterations_used = j.at("clique_iterations_used").get<long>();
        r.clique_capped = j.at("clique_capped").get<bool>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("malformed metrics report: ") + e.what());
    }
}

inline std::string format_fraction(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

/// Column headers in table order. Accuracy and control score appear only for
/// prompted evaluations.
inline std::vector<std::string> table_columns(bool prompted) {
    if (prompted) return {"Novelty", "Playability", "Accuracy", "Diversity", "Score", "Control Score"};
    return {"Novelty", "Playability", "Diversity", "Score"};
}

inline std::vector<std::string> table_row(const MetricsReport& r) {
    if (r.accuracy) {
        return {format_fraction(r.novelty),   format_fraction(r.playability), format_fraction(*r.accuracy),
                format_fraction(r.diversity), format_fraction(r.score),       format_fraction(r.control_score.value_or(0))};
    }
    return {format_fraction(r.novelty), format_fraction(r.playability), format_fraction(r.diversity),
            format_fraction(r.score)};
}

}  // namespace sokgen
