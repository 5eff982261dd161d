#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "sokgen/adapter.hpp"
#include "sokgen/cache.hpp"
#include "sokgen/corpus.hpp"
#include "sokgen/metrics.hpp"
#include "sokgen/ngram.hpp"
#include "sokgen/parallel.hpp"

namespace sokgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

inline constexpr std::string_view kCacheEnv = "SOKGEN_CACHE";
inline constexpr std::string_view kSweepSchema = "sokgen.sweep/1";

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Shared plumbing

/// --cache wins over the environment; neither means an in-memory cache.
inline std::string resolve_cache_path(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(std::string(kCacheEnv).c_str())) return env;
    return {};
}

inline void flush_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) throw IoError("cannot write " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// A directory is read as Boxoban files; a file as a corpus file, falling
/// back to the Microban layout when it holds spaces or ragged rows.
inline std::vector<CorpusFileEntry> load_training(const std::filesystem::path& path, Diagnostics* diag) {
    if (!std::filesystem::exists(path)) throw IoError("no such file or directory: " + path.string());
    std::vector<CorpusFileEntry> out;
    if (std::filesystem::is_directory(path)) {
        for (auto& level : load_boxoban(path, diag).levels) out.push_back({std::nullopt, std::move(level)});
        return out;
    }
    const std::string text = read_text(path);
    try {
        return parse_corpus_file(text);
    } catch (const CorpusError&) {
        for (auto& level : parse_microban(text, path.stem().string()).levels) out.push_back({std::nullopt, std::move(level)});
        return out;
    }
}

inline Corpus load_dataset(const std::string& microban, const std::string& boxoban, Diagnostics* diag) {
    if (microban.empty() == boxoban.empty()) throw std::invalid_argument("give exactly one of --microban and --boxoban");
    if (!microban.empty()) {
        if (!std::filesystem::exists(microban)) throw IoError("no such file: " + microban);
        return load_microban(microban);
    }
    if (!std::filesystem::exists(boxoban)) throw IoError("no such file or directory: " + boxoban);
    return load_boxoban(boxoban, diag);
}

inline std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
        std::string s = "|";
        for (std::size_t c = 0; c < width.size(); ++c) {
            const std::string& v = c < cells.size() ? cells[c] : std::string();
            s += ' ' + v + std::string(width[c] - v.size(), ' ') + " |";
        }
        return s + '\n';
    };
    std::string out = line(header);
    out += '|';
    for (auto w : width) out += std::string(w + 2, '-') + '|';
    out += '\n';
    for (const auto& row : rows) out += line(row);
    return out;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
    std::string input;
    long budget = 150000;
    bool deadlock_pruning = true;
    std::string cache;
    std::size_t workers = 1;
};

/// Solves every level in a level file. Exit 0 iff all levels parse and solve.
inline int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::is_regular_file(opt.input)) throw IoError("no such file: " + opt.input);
    const std::string text = read_text(opt.input);

    struct Item {
        std::optional<Level> level;
        std::string error;
    };
    std::vector<Item> items;
    for (const auto& block : detail::read_blocks(text)) {
        std::vector<std::string> rows;
        for (const auto& line : block.lines) {
            if (!is_annotation_line(line)) rows.push_back(detail::normalize_floor(line));
        }
        try {
            items.push_back({parse_level(detail::join_rows(rows), true), {}});
        } catch (const ParseError& e) {
            items.push_back({std::nullopt, "line " + std::to_string(block.first_line + e.row()) + ": " + e.what()});
        }
    }

    SolutionCache cache(resolve_cache_path(opt.cache));
    const SolverConfig config{opt.budget, opt.deadlock_pruning};
    std::vector<SolveResult> results(items.size());
    parallel_for(items.size(), opt.workers, [&](std::size_t i) {
        if (items[i].level) results[i] = solve_cached(*items[i].level, config, &cache);
    });
    flush_warnings(cache.warnings(), err);

    std::size_t solved = 0;
    out << "index\tstatus\tsolution_len\tnodes_expanded\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].level) {
            out << i << "\tparse_error\t-\t-\n";
            err << "level " << i << ": " << items[i].error << '\n';
            continue;
        }
        const auto& r = results[i];
        solved += r.status == SolveStatus::Solved;
        out << i << '\t' << to_string(r.status) << '\t'
            << (r.solution_len ? std::to_string(*r.solution_len) : "-") << '\t' << r.nodes_expanded
            << '\n';
    }
    out << "solved " << solved << "/" << items.size() << '\n';
    return solved == items.size() && !items.empty() ? kExitOk : kExitDomain;
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareOptions {
    std::string microban;
    std::string boxoban;
    std::optional<double> slice;
    std::uint64_t seed = 0;
    Augmentation augment = Augmentation::None;
    bool annotate = false;
    long budget = 150000;
    std::string cache;
    std::string output;
    std::size_t workers = 1;
};

inline int cmd_prepare(const PrepareOptions& opt, std::ostream& out, std::ostream& err) {
    Diagnostics diag;
    Corpus corpus = load_dataset(opt.microban, opt.boxoban, &diag);
    const std::size_t levels_in = corpus.size();
    if (opt.slice) corpus = slice(corpus, *opt.slice, opt.seed);
    const std::size_t sliced = corpus.size();
    corpus = augment(corpus, opt.augment);
    const std::size_t augmented = corpus.size();

    std::string text;
    std::size_t skipped = 0;
    std::size_t levels_out = corpus.size();
    if (opt.annotate) {
        SolutionCache cache(resolve_cache_path(opt.cache));
        const auto result = annotate(corpus, SolverConfig{opt.budget, true}, &cache, opt.workers, &diag);
        for (const auto& w : cache.warnings()) diag.warnings.push_back(w);
        skipped = result.skipped.size();
        levels_out = result.entries.size();
        text = format_annotated(result.entries);
    } else {
        text = format_plain(corpus);
    }
    flush_warnings(diag.warnings, err);
    write_text(opt.output, text);

    out << "levels_in " << levels_in << '\n'
        << "after_slice " << sliced << '\n'
        << "after_augment " << augmented << '\n'
        << "skipped_unsolvable " << skipped << '\n'
        << "levels_out " << levels_out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Sample sources

struct GeneratorSpec {
    std::string train;            // corpus the n-gram is fitted on
    int order = 16;
    bool controlled = false;      // prompt with annotations from the training pool
    std::string adapter_command;  // external generator over stdin/stdout
    std::string exchange_dir;     // external generator over files
    double adapter_timeout = 600.0;
};

inline std::string training_text(const CorpusFileEntry& e) {
    return (e.annotation ? render_annotation(*e.annotation) : std::string()) + serialize(e.level);
}

/// Seed of the c-th generation call derived from a run seed.
inline std::uint64_t call_seed(std::uint64_t seed, std::uint64_t call) {
    detail::SampleRng rng{seed * 0x9e3779b97f4a7c15ULL + call};
    return rng.next();
}

class SampleSource {
  public:
    SampleSource(const GeneratorSpec& spec, const std::vector<CorpusFileEntry>& training) : spec_(spec) {
        for (const auto& e : training) {
            if (e.annotation) pool_.push_back(*e.annotation);
        }
        if (spec.controlled && pool_.size() != training.size()) {
            throw PromptVocabularyMismatch("controlled generation needs an annotated training corpus");
        }
        if (spec.adapter_command.empty() && spec.exchange_dir.empty()) {
            std::vector<std::string> texts;
            for (const auto& e : training) texts.push_back(training_text(e));
            model_ = NGramModel::train(texts, spec.order);
        }
    }

    std::vector<Sample> draw(std::size_t n, const GenerationParams& params, Diagnostics* diag) const {
        std::vector<Sample> samples;
        if (model_) {
            for (std::uint64_t call = 0; samples.size() < n; ++call) {
                GenerationParams p = params;
                p.seed = call_seed(params.seed, call);
                std::optional<Annotation> prompt;
                if (spec_.controlled) prompt = sample_annotation(pool_, p.seed);
                const auto beams = prompt ? generate_controlled(*model_, prompt, p) : generate(*model_, "", p);
                for (const auto& text : beams) {
                    if (samples.size() < n) samples.push_back({prompt, text});
                }
            }
            return samples;
        }
        std::vector<std::string> prompts(n);
        std::vector<std::optional<Annotation>> annotations(n);
        if (spec_.controlled) {
            for (std::size_t i = 0; i < n; ++i) {
                annotations[i] = sample_annotation(pool_, call_seed(params.seed, i));
                prompts[i] = render_annotation(*annotations[i]);
            }
        }
        GeneratorAdapter adapter;
        adapter.timeout_seconds = spec_.adapter_timeout;
        if (!spec_.adapter_command.empty()) {
            adapter.endpoint = spec_.adapter_command;
        } else {
            adapter.mode = GeneratorAdapter::Mode::FileExchange;
            adapter.endpoint = spec_.exchange_dir;
        }
        const auto completions = adapter_generate(adapter, prompts, params, diag);
        for (std::size_t i = 0; i < n; ++i) samples.push_back({annotations[i], completions[i]});
        return samples;
    }

  private:
    GeneratorSpec spec_;
    std::vector<Annotation> pool_;
    std::optional<NGramModel> model_;
};

// Samples file: one JSON object per line, {"prompt": string (optional),
// "completion": string}.
inline std::string format_samples(const std::vector<Sample>& samples) {
    std::string out;
    for (const auto& s : samples) {
        nlohmann::ordered_json j;
        if (s.prompt) j["prompt"] = render_annotation(*s.prompt);
        j["completion"] = s.completion;
        out += j.dump() + '\n';
    }
    return out;
}

inline std::vector<Sample> parse_samples(std::string_view text) {
    std::vector<Sample> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("completion") || !j["completion"].is_string() ||
            (j.contains("prompt") && !j["prompt"].is_string() && !j["prompt"].is_null())) {
            throw std::invalid_argument("samples line " + std::to_string(line_no) +
                                        ": expected {\"prompt\"?: string, \"completion\": string}");
        }
        Sample s;
        s.completion = j["completion"].get<std::string>();
        if (j.contains("prompt") && j["prompt"].is_string()) {
            const auto prompt = j["prompt"].get<std::string>();
            auto [annotation, rest] = split_annotation(prompt);
            if (annotation.empty() || rest.find_first_not_of(" \t\r\n") != std::string_view::npos) {
                throw std::invalid_argument("samples line " + std::to_string(line_no) + ": prompt is not an annotation");
            }
            s.prompt = annotation;
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
    GeneratorSpec generator;
    GenerationParams params;
    std::size_t n = 100;
    std::string output;
};

inline int cmd_generate(const GenerateOptions& opt, std::ostream& out, std::ostream& err) {
    Diagnostics diag;
    const auto training = load_training(opt.generator.train, &diag);
    const SampleSource source(opt.generator, training);
    const auto samples = source.draw(opt.n, opt.params, &diag);
    flush_warnings(diag.warnings, err);
    write_text(opt.output, format_samples(samples));
    out << "samples " << samples.size() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    std::string samples;  // samples file; empty means generate
    GeneratorSpec generator;
    GenerationParams params;
    std::size_t n = 100;
    std::string train;  // novelty reference corpus
    int k = 5;
    long clique_cap = 1'000'000;
    long budget = 150000;
    Tolerances tolerances;
    std::string cache;
    std::string output;
    std::string label;
    std::size_t workers = 1;
};

struct Evaluator {
    NoveltyIndex index;
    EvaluationConfig config;
    SolutionCache cache;

    MetricsReport run(const std::vector<Sample>& samples) {
        return score(evaluate_samples(samples, index, config, &cache), config.distinctness);
    }
};

inline Evaluator make_evaluator(const EvaluateOptions& opt, const std::vector<CorpusFileEntry>& training) {
    std::vector<std::string> texts;
    for (const auto& e : training) texts.push_back(serialize(e.level));
    EvaluationConfig config;
    config.solver = {opt.budget, true};
    config.distinctness = {opt.k, opt.clique_cap};
    config.tolerances = opt.tolerances;
    config.workers = opt.workers;
    return {NoveltyIndex(std::move(texts)), config, SolutionCache(resolve_cache_path(opt.cache))};
}

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
    Diagnostics diag;
    const auto training = load_training(opt.train, &diag);
    std::vector<Sample> samples;
    if (!opt.samples.empty()) {
        samples = parse_samples(read_text(opt.samples));
    } else {
        GeneratorSpec spec = opt.generator;
        if (spec.train.empty()) spec.train = opt.train;
        const auto generator_training = spec.train == opt.train ? training : load_training(spec.train, &diag);
        samples = SampleSource(spec, generator_training).draw(opt.n, opt.params, &diag);
    }
    auto evaluator = make_evaluator(opt, training);
    const auto report = evaluator.run(samples);
    for (const auto& w : evaluator.cache.warnings()) diag.warnings.push_back(w);
    flush_warnings(diag.warnings, err);
    if (report.clique_capped) err << "warning: clique search hit its iteration cap; diversity is a lower bound\n";

    if (!opt.output.empty()) write_text(opt.output, to_json(report, opt.label).dump(2) + '\n');
    std::vector<std::string> header = table_columns(report.accuracy.has_value());
    out << render_table(header, {table_row(report)});
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepSpec {
    std::vector<double> temperatures = {0.7, 1.0, 1.3};
    std::vector<double> top_ps = {0.9, 1.0};
    std::vector<int> beam_counts = {1, 5};
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::size_t samples_per_config = 100;
    int max_chars = 256;
};

struct SweepOptions {
    EvaluateOptions evaluation;  // generator, training corpus, metric settings
    SweepSpec spec;
};

struct SweepCell {
    std::uint64_t seed = 0;
    std::optional<MetricsReport> report;
    std::string error;
};

struct SweepConfigResult {
    double temperature = 0;
    double top_p = 0;
    int beams = 0;
    std::vector<SweepCell> cells;
    std::optional<MetricsReport> mean;  // over successful cells
};

struct SweepResult {
    std::vector<SweepConfigResult> configs;
    std::optional<std::size_t> best;
};

/// Field-wise mean of reports. Accuracy and control score are averaged only
/// when every report has them.
inline MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
    MetricsReport m;
    const double n = static_cast<double>(reports.size());
    bool prompted = true;
    for (const auto& r : reports) prompted = prompted && r.accuracy && r.control_score;
    double accuracy = 0, control = 0;
    for (const auto& r : reports) {
        m.n_samples = std::max(m.n_samples, r.n_samples);
        m.novelty += r.novelty / n;
        m.playability += r.playability / n;
        m.diversity += r.diversity / n;
        m.score += r.score / n;
        if (prompted) {
            accuracy += *r.accuracy / n;
            control += *r.control_score / n;
        }
        m.clique_iterations_used += r.clique_iterations_used;
        m.clique_capped = m.clique_capped || r.clique_capped;
    }
    if (prompted && !reports.empty()) {
        m.accuracy = accuracy;
        m.control_score = control;
    }
    return m;
}

/// Highest mean score; ties go to lower temperature, then higher top_p, then
/// fewer beams.
inline std::optional<std::size_t> best_config(const std::vector<SweepConfigResult>& configs) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (!configs[i].mean) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& a = configs[i];
        const auto& b = configs[*best];
        const auto key_a = std::make_tuple(a.mean->score, -a.temperature, a.top_p, -a.beams);
        const auto key_b = std::make_tuple(b.mean->score, -b.temperature, b.top_p, -b.beams);
        if (key_a > key_b) best = i;
    }
    return best;
}

inline SweepResult run_sweep(const SweepOptions& opt, std::ostream& err) {
    const auto& spec = opt.spec;
    if (spec.temperatures.empty() || spec.top_ps.empty() || spec.beam_counts.empty() || spec.seeds.empty()) {
        throw std::invalid_argument("every sweep list must be non-empty");
    }
    Diagnostics diag;
    const auto& ev = opt.evaluation;
    const auto training = load_training(ev.train, &diag);
    GeneratorSpec gen = ev.generator;
    if (gen.train.empty()) gen.train = ev.train;
    const auto generator_training = gen.train == ev.train ? training : load_training(gen.train, &diag);
    const SampleSource source(gen, generator_training);
    auto evaluator = make_evaluator(ev, training);

    SweepResult result;
    for (double t : spec.temperatures) {
        for (double p : spec.top_ps) {
            for (int b : spec.beam_counts) {
                SweepConfigResult config{t, p, b, {}, std::nullopt};
                std::vector<MetricsReport> ok;
                for (auto seed : spec.seeds) {
                    SweepCell cell{seed, std::nullopt, {}};
                    try {
                        GenerationParams params{t, p, b, spec.max_chars, seed};
                        cell.report = evaluator.run(source.draw(spec.samples_per_config, params, &diag));
                        ok.push_back(*cell.report);
                    } catch (const std::exception& e) {
                        cell.error = e.what();
                        err << "sweep cell T=" << t << " top_p=" << p << " beams=" << b << " seed=" << seed
                            << " failed: " << e.what() << '\n';
                    }
                    config.cells.push_back(std::move(cell));
                }
                if (!ok.empty()) config.mean = mean_report(ok);
                result.configs.push_back(std::move(config));
            }
        }
    }
    for (const auto& w : evaluator.cache.warnings()) diag.warnings.push_back(w);
    flush_warnings(diag.warnings, err);
    result.best = best_config(result.configs);
    return result;
}

inline nlohmann::ordered_json to_json(const SweepResult& r) {
    nlohmann::ordered_json j;
    j["schema"] = std::string(kSweepSchema);
    auto& configs = j["configs"] = nlohmann::ordered_json::array();
    for (const auto& c : r.configs) {
        nlohmann::ordered_json cj;
        cj["temperature"] = c.temperature;
        cj["top_p"] = c.top_p;
        cj["beams"] = c.beams;
        cj["mean"] = c.mean ? to_json(*c.mean) : nlohmann::ordered_json(nullptr);
        auto& cells = cj["cells"] = nlohmann::ordered_json::array();
        for (const auto& cell : c.cells) {
            nlohmann::ordered_json x;
            x["seed"] = cell.seed;
            if (cell.report) {
                x["report"] = to_json(*cell.report);
            } else {
                x["error"] = cell.error;
            }
            cells.push_back(std::move(x));
        }
        configs.push_back(std::move(cj));
    }
    if (r.best) {
        const auto& b = r.configs[*r.best];
        j["best_config"] = {{"temperature", b.temperature}, {"top_p", b.top_p}, {"beams", b.beams},
                            {"mean_score", b.mean->score}};
    } else {
        j["best_config"] = nullptr;
    }
    return j;
}

inline std::string format_number(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    const auto result = run_sweep(opt, err);
    if (!opt.evaluation.output.empty()) write_text(opt.evaluation.output, to_json(result).dump(2) + '\n');

    bool prompted = false;
    for (const auto& c : result.configs) prompted = prompted || (c.mean && c.mean->accuracy);
    std::vector<std::string> header = {"Temperature", "Top-p", "Beams"};
    for (auto& col : table_columns(prompted)) header.push_back(col);
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : result.configs) {
        std::vector<std::string> row = {format_number(c.temperature), format_number(c.top_p), std::to_string(c.beams)};
        if (c.mean) {
            for (auto& v : table_row(*c.mean)) row.push_back(v);
        } else {
            row.push_back("failed");
        }
        rows.push_back(std::move(row));
    }
    out << render_table(header, rows);
    if (!result.best) {
        out << "best: none (every cell failed)\n";
        return kExitDomain;
    }
    const auto& b = result.configs[*result.best];
    out << "best: temperature " << format_number(b.temperature) << ", top_p " << format_number(b.top_p)
        << ", beams " << b.beams << ", mean score " << format_fraction(b.mean->score) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
    std::vector<std::string> inputs;
};

inline int cmd_report(const ReportOptions& opt, std::ostream& out, std::ostream&) {
    if (opt.inputs.empty()) throw std::invalid_argument("report needs at least one metrics file");
    std::vector<std::pair<std::string, MetricsReport>> rows;
    for (const auto& path : opt.inputs) {
        const auto j = nlohmann::json::parse(read_text(path), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw SchemaMismatch(path + ": not a JSON metrics report");
        std::string label = j.contains("label") && j["label"].is_string() ? j["label"].get<std::string>()
                                                                          : std::filesystem::path(path).stem().string();
        rows.emplace_back(std::move(label), metrics_from_json(j));
    }
    bool prompted = false;
    for (const auto& [label, r] : rows) prompted = prompted || r.accuracy.has_value();
    std::vector<std::string> header = {"Run"};
    for (auto& c : table_columns(prompted)) header.push_back(c);
    std::vector<std::vector<std::string>> cells;
    for (auto& [label, r] : rows) {
        if (prompted && !r.accuracy) {
            cells.push_back({label, format_fraction(r.novelty), format_fraction(r.playability), "-",
                             format_fraction(r.diversity), format_fraction(r.score), "-"});
            continue;
        }
        std::vector<std::string> row = {label};
        for (auto& v : table_row(r)) row.push_back(v);
        cells.push_back(std::move(row));
    }
    out << render_table(header, cells);
    return kExitOk;
}

// ---------------------------------------------------------------------------

/// Runs a command and maps failures to exit codes: 2 for files, processes
/// and adapters, 1 for everything the inputs themselves got wrong.
template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const CorpusError& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == CorpusError::Kind::Io ? kExitIo : kExitDomain;
    } catch (const AdapterTimeout& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ProtocolError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::system_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}

}  // namespace sokgen::cli
