#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sokgen/annotation.hpp"
#include "sokgen/cache.hpp"
#include "sokgen/level.hpp"
#include "sokgen/parallel.hpp"
#include "sokgen/solver.hpp"

namespace sokgen {

struct Corpus {
    std::string name;
    std::vector<Level> levels;
    std::vector<std::string> provenance;  // parallel to levels

    std::size_t size() const noexcept { return levels.size(); }

    void add(Level level, std::string source) {
        levels.push_back(std::move(level));
        provenance.push_back(std::move(source));
    }
};

/// Collects non-fatal problems. Without a sink, warnings go to stderr.
struct Diagnostics {
    std::vector<std::string> warnings;
};

inline void warn(Diagnostics* diag, std::string message) {
    if (diag) {
        diag->warnings.push_back(std::move(message));
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

class CorpusError : public std::runtime_error {
  public:
    enum class Kind { Io, Parse, Shape };

    CorpusError(Kind kind, std::string message, std::size_t level_index = 0)
        : std::runtime_error(std::move(message)), kind_(kind), level_index_(level_index) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t level_index() const noexcept { return level_index_; }

  private:
    Kind kind_;
    std::size_t level_index_;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError(CorpusError::Kind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw CorpusError(CorpusError::Kind::Io, "failed reading " + path.string());
    return ss.str();
}

inline std::string_view rtrim(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool is_blank(std::string_view s) { return rtrim(s).empty(); }

// A run of consecutive level rows, plus the comment that preceded it.
struct TextBlock {
    std::string title;
    std::vector<std::string> lines;
    std::size_t first_line = 0;
};

inline bool is_metadata(std::string_view line) {
    return line.starts_with(";") || line.starts_with("Title:") || line.starts_with("Author:") ||
           line.starts_with("Comment:");
}

/// Splits text into blocks separated by blank or comment lines. Annotation
/// lines stay inside their block.
inline std::vector<TextBlock> read_blocks(std::string_view text) {
    std::vector<TextBlock> blocks;
    TextBlock current;
    std::string pending_title;
    std::size_t line_no = 0;
    auto flush = [&] {
        if (!current.lines.empty()) blocks.push_back(std::move(current));
        current = TextBlock{};
    };
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = rtrim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) {
            flush();
        } else if (is_metadata(line)) {
            flush();
            if (line.starts_with(";")) {
                std::string_view t = line.substr(1);
                while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
                pending_title = std::string(t);
            }
        } else {
            if (current.lines.empty()) {
                current.first_line = line_no;
                current.title = std::move(pending_title);
                pending_title.clear();
            }
            current.lines.emplace_back(line);
        }
    }
    flush();
    return blocks;
}

inline std::string normalize_floor(std::string_view row) {
    std::string out(row);
    std::replace(out.begin(), out.end(), ' ', '-');
    return out;
}

inline std::string join_rows(const std::vector<std::string>& rows) {
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) out.push_back('\n');
        out += rows[i];
    }
    return out;
}

}  // namespace detail

/// Microban-style text: levels separated by blank lines, `;` title lines
/// ignored, spaces read as floor, ragged rows padded with walls.
inline Corpus parse_microban(std::string_view text, std::string name = "microban") {
    Corpus corpus;
    corpus.name = std::move(name);
    std::size_t index = 0;
    for (const auto& block : detail::read_blocks(text)) {
        std::vector<std::string> rows;
        for (const auto& line : block.lines) rows.push_back(detail::normalize_floor(line));
        try {
            corpus.add(parse_level(detail::join_rows(rows), true),
                       corpus.name + ":" + (block.title.empty() ? std::to_string(index + 1) : block.title));
        } catch (const ParseError& e) {
            throw CorpusError(CorpusError::Kind::Parse,
                              "level " + std::to_string(index) + " (line " +
                                  std::to_string(block.first_line + e.row()) + "): " + e.what(),
                              index);
        }
        ++index;
    }
    return corpus;
}

inline Corpus load_microban(const std::filesystem::path& path) {
    return parse_microban(detail::read_file(path), path.stem().string());
}

inline constexpr std::size_t kBoxobanSide = 10;

/// One file in the public Boxoban layout: `; <id>` header, then ten rows of
/// ten characters with space for floor.
inline void parse_boxoban_into(Corpus& corpus, std::string_view text, const std::string& source) {
    for (const auto& block : detail::read_blocks(text)) {
        const std::size_t index = corpus.size();
        const std::string where = source + ":" + (block.title.empty() ? std::to_string(index) : block.title);
        std::vector<std::string> rows;
        for (const auto& line : block.lines) rows.push_back(detail::normalize_floor(line));
        const bool square = rows.size() == kBoxobanSide &&
                            std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.size() == kBoxobanSide; });
        if (!square) {
            throw CorpusError(CorpusError::Kind::Shape, where + ": Boxoban levels must be 10x10", index);
        }
        try {
            corpus.add(parse_level(detail::join_rows(rows)), where);
        } catch (const ParseError& e) {
            throw CorpusError(CorpusError::Kind::Parse, where + ": " + e.what(), index);
        }
    }
}

/// Loads a Boxoban file, or every regular file of a directory in name order.
inline Corpus load_boxoban(const std::filesystem::path& path, Diagnostics* diag = nullptr) {
    namespace fs = std::filesystem;
    Corpus corpus;
    corpus.name = path.filename().string();
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path, ec)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        if (ec) throw CorpusError(CorpusError::Kind::Io, "cannot list " + path.string());
        std::sort(files.begin(), files.end());
        if (files.empty()) warn(diag, "no Boxoban files in " + path.string());
        for (const auto& file : files) parse_boxoban_into(corpus, detail::read_file(file), file.filename().string());
    } else {
        parse_boxoban_into(corpus, detail::read_file(path), path.filename().string());
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Slicing and augmentation

namespace detail {

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // Uniform in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }
};

}  // namespace detail

/// Number of levels kept by a slice: ceil(fraction * n).
inline std::size_t slice_size(std::size_t n, double fraction) {
    const double want = fraction * static_cast<double>(n);
    // Absorb representation error such as 0.01 * 438000 = 4380.0000000000005.
    return std::min(n, static_cast<std::size_t>(std::ceil(want - 1e-9 * std::max(1.0, want))));
}

/// Uniform sample without replacement, kept in corpus order.
inline Corpus slice(const Corpus& corpus, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("slice fraction must be in (0, 1]");
    if (fraction == 1.0) return corpus;
    const std::size_t n = corpus.size();
    const std::size_t k = slice_size(n, fraction);
    std::vector<std::size_t> index(n);
    for (std::size_t i = 0; i < n; ++i) index[i] = i;
    detail::SplitMix64 rng{seed};
    for (std::size_t i = 0; i < k; ++i) std::swap(index[i], index[i + rng.below(n - i)]);
    index.resize(k);
    std::sort(index.begin(), index.end());

    Corpus out;
    out.name = corpus.name;
    for (auto i : index) out.add(corpus.levels[i], corpus.provenance[i]);
    return out;
}

enum class Augmentation { None, Flip, FlipRotate };

/// Originals first, then per level its FlipX, FlipY (and for FlipRotate its
/// Rot90CW, Rot90CCW) copies. Levels whose serialization already appeared are
/// dropped.
inline Corpus augment(const Corpus& corpus, Augmentation scheme) {
    if (scheme == Augmentation::None) return corpus;
    std::vector<Transform> ops = {Transform::FlipX, Transform::FlipY};
    if (scheme == Augmentation::FlipRotate) {
        ops.push_back(Transform::Rot90CW);
        ops.push_back(Transform::Rot90CCW);
    }
    Corpus out;
    out.name = corpus.name;
    std::unordered_set<std::string> seen;
    auto keep = [&](Level level, std::string source) {
        if (seen.insert(serialize(level)).second) out.add(std::move(level), std::move(source));
    };
    for (std::size_t i = 0; i < corpus.size(); ++i) keep(corpus.levels[i], corpus.provenance[i]);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (Transform op : ops) {
            keep(transform(corpus.levels[i], op), corpus.provenance[i] + "/" + std::string(to_string(op)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Annotation

struct AnnotatedLevel {
    Annotation annotation;
    Level level;
};

struct AnnotateResult {
    std::vector<AnnotatedLevel> entries;
    std::vector<std::size_t> skipped;  // corpus indices without a solution
};

/// Prefixes every solvable level with its prop_empty and solution length.
/// Levels the solver does not finish are skipped and reported.
inline AnnotateResult annotate(const Corpus& corpus, const SolverConfig& config, SolutionCache* cache = nullptr,
                               std::size_t workers = 1, Diagnostics* diag = nullptr) {
    std::vector<SolveResult> results(corpus.size());
    parallel_for(corpus.size(), workers,
                 [&](std::size_t i) { results[i] = solve_cached(corpus.levels[i], config, cache); });

    AnnotateResult out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (results[i].status != SolveStatus::Solved) {
            out.skipped.push_back(i);
            continue;
        }
        out.entries.push_back({{prop_empty_milli(corpus.levels[i]), results[i].solution_len}, corpus.levels[i]});
    }
    if (!out.skipped.empty()) {
        std::string ids;
        for (std::size_t n = 0; n < out.skipped.size() && n < 10; ++n) {
            ids += (n ? ", " : "") + corpus.provenance[out.skipped[n]];
        }
        if (out.skipped.size() > 10) ids += ", ...";
        warn(diag, "skipped " + std::to_string(out.skipped.size()) + " level(s) without a solution: " + ids);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corpus files written by this toolkit: entries separated by one blank
// line, each optionally headed by annotation lines.

inline std::string format_annotated(const std::vector<AnnotatedLevel>& entries) {
    std::string out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out.push_back('\n');
        out += render_annotation(entries[i].annotation);
        out += serialize(entries[i].level);
        out.push_back('\n');
    }
    return out;
}

inline std::string format_plain(const Corpus& corpus) {
    std::string out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (i) out.push_back('\n');
        out += serialize(corpus.levels[i]);
        out.push_back('\n');
    }
    return out;
}

struct CorpusFileEntry {
    std::optional<Annotation> annotation;
    Level level;
};

/// Reads a plain or annotated corpus file. Level rows must already be
/// canonical and rectangular.
inline std::vector<CorpusFileEntry> parse_corpus_file(std::string_view text) {
    std::vector<CorpusFileEntry> out;
    std::size_t index = 0;
    for (const auto& block : detail::read_blocks(text)) {
        const std::string joined = detail::join_rows(block.lines);
        auto [annotation, body] = split_annotation(joined);
        try {
            out.push_back({annotation.empty() ? std::nullopt : std::optional(annotation), parse_level(body)});
        } catch (const ParseError& e) {
            throw CorpusError(CorpusError::Kind::Parse,
                              "entry " + std::to_string(index) + " (line " + std::to_string(block.first_line) +
                                  "): " + e.what(),
                              index);
        }
        ++index;
    }
    return out;
}

inline std::vector<CorpusFileEntry> load_corpus_file(const std::filesystem::path& path) {
    return parse_corpus_file(detail::read_file(path));
}

}  // namespace sokgen
