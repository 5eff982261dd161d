#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sokgen/commands.hpp"
#include "support/fixtures.hpp"

using namespace sokgen;
using namespace sokgen::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SOKGEN_TEST_DATA;

class TempDir {
  public:
    TempDir() : path_(fs::temp_directory_path() / ("sokgen-cli-" + std::to_string(::getpid()) + "-" +
                                                   std::to_string(counter_++))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

  private:
    static inline int counter_ = 0;
    fs::path path_;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read(const fs::path& p) { return read_text(p); }

// Runs the installed binary and returns its exit status.
int run_cli(const std::string& args) {
    const std::string cmd = std::string(SOKGEN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

MetricsReport sample_report(double score) {
    MetricsReport r;
    r.n_samples = 100;
    r.novelty = 0.9;
    r.playability = 0.6;
    r.diversity = 0.7;
    r.score = score;
    return r;
}

EvaluateOptions small_evaluation(const fs::path& train) {
    EvaluateOptions ev;
    ev.train = train.string();
    ev.generator.order = 6;
    ev.n = 20;
    ev.params.seed = 3;
    return ev;
}

}  // namespace

TEST(CmdSolve, FigureLevelsAllSolved) {
    TempDir dir;
    write(dir / "fig.txt", fixtures::kFigureLeft + "\n\n" + fixtures::kFigureRight + "\n");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_solve({(dir / "fig.txt").string()}, out, err), kExitOk);
    EXPECT_NE(out.str().find("0\tsolved\t65\t"), std::string::npos);
    EXPECT_NE(out.str().find("1\tsolved\t42\t"), std::string::npos);
    EXPECT_NE(out.str().find("solved 2/2"), std::string::npos);
}

TEST(CmdSolve, CornerDeadlockFails) {
    TempDir dir;
    write(dir / "dead.txt", fixtures::kCornerDeadlock + "\n");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_solve({(dir / "dead.txt").string()}, out, err), kExitDomain);
    EXPECT_NE(out.str().find("proved_unsolvable"), std::string::npos);
    EXPECT_NE(out.str().find("solved 0/1"), std::string::npos);
}

TEST(CmdSolve, BudgetOneExhausts) {
    TempDir dir;
    write(dir / "fig.txt", fixtures::kFigureLeft + "\n");
    SolveOptions opt{(dir / "fig.txt").string()};
    opt.budget = 1;
    std::ostringstream out, err;
    EXPECT_EQ(cmd_solve(opt, out, err), kExitDomain);
    EXPECT_NE(out.str().find("exhausted_budget"), std::string::npos);
}

TEST(CmdSolve, ParseFailuresAreListed) {
    TempDir dir;
    write(dir / "mixed.txt", fixtures::kOnePush + "\n\n#####\n#@x.#\n#####\n");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_solve({(dir / "mixed.txt").string()}, out, err), kExitDomain);
    EXPECT_NE(out.str().find("1\tparse_error"), std::string::npos);
    EXPECT_NE(err.str().find("level 1"), std::string::npos);
}

TEST(CmdSolve, MissingFileIsIoFailure) {
    std::ostringstream out, err;
    const int rc = run_guarded([&] { return cmd_solve({"/nonexistent/levels.txt"}, out, err); }, err);
    EXPECT_EQ(rc, kExitIo);
}

TEST(CmdSolve, CacheFromEnvironment) {
    TempDir dir;
    write(dir / "fig.txt", fixtures::kFigureLeft + "\n");
    const auto cache = dir / "cache.jsonl";
    ::setenv("SOKGEN_CACHE", cache.c_str(), 1);
    std::ostringstream out, err;
    EXPECT_EQ(cmd_solve({(dir / "fig.txt").string()}, out, err), kExitOk);
    ::unsetenv("SOKGEN_CACHE");
    ASSERT_TRUE(fs::exists(cache));
    EXPECT_NE(read(cache).find("\"solution_len\":65"), std::string::npos);
    // The flag takes precedence over the environment.
    EXPECT_EQ(resolve_cache_path("x.jsonl"), "x.jsonl");
}

TEST(CmdPrepare, FlipAtMostTriples) {
    TempDir dir;
    PrepareOptions opt;
    opt.microban = (kData / "microban_fixture.txt").string();
    opt.augment = Augmentation::Flip;
    opt.output = (dir / "flip.txt").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_prepare(opt, out, err), kExitOk);
    const auto entries = load_corpus_file(opt.output);
    const auto source = load_microban(opt.microban);
    EXPECT_GT(entries.size(), source.size());
    EXPECT_LE(entries.size(), 3 * source.size());
    EXPECT_NE(out.str().find("levels_out " + std::to_string(entries.size())), std::string::npos);
}

TEST(CmdPrepare, SliceIsDeterministic) {
    TempDir dir;
    PrepareOptions opt;
    opt.boxoban = (kData / "boxoban").string();
    opt.slice = 0.001;
    opt.seed = 7;
    std::ostringstream out, err;
    opt.output = (dir / "a.txt").string();
    ASSERT_EQ(cmd_prepare(opt, out, err), kExitOk);
    opt.output = (dir / "b.txt").string();
    ASSERT_EQ(cmd_prepare(opt, out, err), kExitOk);
    EXPECT_EQ(read(dir / "a.txt"), read(dir / "b.txt"));
    EXPECT_EQ(load_corpus_file(dir / "a.txt").size(), 1u);
}

TEST(CmdPrepare, AnnotateSkipsUnsolvable) {
    TempDir dir;
    PrepareOptions opt;
    opt.microban = (kData / "unsolvable.txt").string();
    opt.annotate = true;
    opt.output = (dir / "ann.txt").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_prepare(opt, out, err), kExitOk);
    EXPECT_NE(out.str().find("skipped_unsolvable 1"), std::string::npos);
    const auto entries = load_corpus_file(opt.output);
    ASSERT_EQ(entries.size(), 2u);
    for (const auto& e : entries) {
        ASSERT_TRUE(e.annotation);
        EXPECT_EQ(e.annotation->solution_len, solve(e.level).solution_len);
        EXPECT_EQ(e.annotation->prop_empty_milli, prop_empty_milli(e.level));
    }
}

TEST(CmdPrepare, RequiresExactlyOneDataset) {
    PrepareOptions opt;
    opt.output = "unused.txt";
    std::ostringstream out, err;
    EXPECT_EQ(run_guarded([&] { return cmd_prepare(opt, out, err); }, err), kExitDomain);
}

TEST(Samples, RoundTrip) {
    Annotation a;
    a.prop_empty_milli = 250;
    a.solution_len = 65;
    const std::vector<Sample> samples = {{a, "####\n#@$.\n####"}, {std::nullopt, "garbage\n\"x\""}};
    const auto parsed = parse_samples(format_samples(samples));
    ASSERT_EQ(parsed.size(), 2u);
    EXPECT_EQ(parsed[0].prompt->prop_empty_milli, 250);
    EXPECT_EQ(parsed[0].prompt->solution_len, 65);
    EXPECT_EQ(parsed[0].completion, samples[0].completion);
    EXPECT_FALSE(parsed[1].prompt);
    EXPECT_EQ(parsed[1].completion, samples[1].completion);
    EXPECT_THROW(parse_samples("{\"prompt\": \"hello\", \"completion\": \"\"}\n"), std::invalid_argument);
    EXPECT_THROW(parse_samples("not json\n"), std::invalid_argument);
}

TEST(CmdGenerate, WritesRequestedSampleCount) {
    TempDir dir;
    GenerateOptions opt;
    opt.generator.train = (kData / "microban_fixture.txt").string();
    opt.generator.order = 6;
    opt.params.beams = 3;
    opt.n = 10;
    opt.output = (dir / "s.jsonl").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_generate(opt, out, err), kExitOk);
    EXPECT_EQ(parse_samples(read(opt.output)).size(), 10u);
}

TEST(CmdGenerate, ControlledNeedsAnnotatedCorpus) {
    TempDir dir;
    GenerateOptions opt;
    opt.generator.train = (kData / "microban_fixture.txt").string();
    opt.generator.controlled = true;
    opt.output = (dir / "s.jsonl").string();
    std::ostringstream out, err;
    EXPECT_EQ(run_guarded([&] { return cmd_generate(opt, out, err); }, err), kExitDomain);
}

TEST(CmdEvaluate, TrainingAgainstItself) {
    TempDir dir;
    const auto corpus = load_microban(kData / "microban_fixture.txt");
    std::vector<Sample> samples;
    for (const auto& level : corpus.levels) samples.push_back({std::nullopt, serialize(level)});
    write(dir / "self.jsonl", format_samples(samples));
    auto ev = small_evaluation(kData / "microban_fixture.txt");
    ev.samples = (dir / "self.jsonl").string();
    ev.output = (dir / "r.json").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_evaluate(ev, out, err), kExitOk);
    const auto r = metrics_from_json(nlohmann::json::parse(read(ev.output)));
    EXPECT_EQ(r.novelty, 0.0);
    EXPECT_EQ(r.playability, 1.0);
    EXPECT_EQ(r.score, 0.0);
    EXPECT_NE(out.str().find("| 0.00    | 1.00"), std::string::npos);
}

TEST(CmdEvaluate, GarbageAdapterScoresZeroPlayability) {
    TempDir dir;
    auto ev = small_evaluation(kData / "microban_fixture.txt");
    ev.generator.adapter_command = std::string(SOKGEN_ECHO_ADAPTER) + " --garbage";
    ev.generator.adapter_timeout = 30;
    ev.output = (dir / "r.json").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_evaluate(ev, out, err), kExitOk);
    const auto r = metrics_from_json(nlohmann::json::parse(read(ev.output)));
    EXPECT_EQ(r.n_samples, 20u);
    EXPECT_EQ(r.playability, 0.0);
    EXPECT_EQ(r.score, 0.0);
}

TEST(CmdEvaluate, DroppedAdapterIdCountsAsInvalid) {
    TempDir dir;
    const auto train = kData / "microban_fixture.txt";
    // Unconditional prompts are empty, so the echoed completions are not levels either.
    auto ev = small_evaluation(train);
    ev.generator.adapter_command = std::string(SOKGEN_ECHO_ADAPTER) + " --drop 4";
    ev.output = (dir / "r.json").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_evaluate(ev, out, err), kExitOk);
    EXPECT_NE(err.str().find("no completion for id 4"), std::string::npos);
    const auto r = metrics_from_json(nlohmann::json::parse(read(ev.output)));
    EXPECT_EQ(r.n_samples, 20u);
    EXPECT_EQ(r.playability, 0.0);
}

TEST(CmdEvaluate, RerunsAreByteIdentical) {
    TempDir dir;
    auto ev = small_evaluation(kData / "microban_fixture.txt");
    ev.workers = 4;
    std::ostringstream out1, out2, err;
    ev.output = (dir / "a.json").string();
    ASSERT_EQ(cmd_evaluate(ev, out1, err), kExitOk);
    ev.output = (dir / "b.json").string();
    ASSERT_EQ(cmd_evaluate(ev, out2, err), kExitOk);
    EXPECT_EQ(read(dir / "a.json"), read(dir / "b.json"));
    EXPECT_EQ(out1.str(), out2.str());
}

TEST(CmdSweep, SingleCellEqualsEvaluate) {
    TempDir dir;
    auto ev = small_evaluation(kData / "microban_fixture.txt");
    ev.params = {1.0, 0.9, 2, 256, 5};
    ev.output = (dir / "eval.json").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_evaluate(ev, out, err), kExitOk);

    SweepOptions sw;
    sw.evaluation = ev;
    sw.evaluation.output = (dir / "sweep.json").string();
    sw.spec = {{1.0}, {0.9}, {2}, {5}, ev.n, 256};
    ASSERT_EQ(cmd_sweep(sw, out, err), kExitOk);
    const auto sweep = nlohmann::json::parse(read(dir / "sweep.json"));
    const auto single = nlohmann::json::parse(read(dir / "eval.json"));
    EXPECT_EQ(metrics_from_json(sweep["configs"][0]["mean"]), metrics_from_json(single));
    EXPECT_EQ(sweep["best_config"]["beams"], 2);
}

TEST(CmdSweep, BestConfigPrefersDominatorThenTieBreaks) {
    auto config = [](double t, double p, int b, double score) {
        SweepConfigResult c{t, p, b, {}, sample_report(score)};
        return c;
    };
    EXPECT_EQ(best_config({config(0.7, 0.9, 1, 0.2), config(1.0, 1.0, 5, 0.4), config(1.3, 1.0, 1, 0.3)}), 1u);
    // Equal means: lower temperature, then higher top_p, then fewer beams.
    EXPECT_EQ(best_config({config(1.0, 1.0, 1, 0.4), config(0.7, 0.9, 5, 0.4)}), 1u);
    EXPECT_EQ(best_config({config(0.7, 0.9, 1, 0.4), config(0.7, 1.0, 5, 0.4)}), 1u);
    EXPECT_EQ(best_config({config(0.7, 1.0, 5, 0.4), config(0.7, 1.0, 1, 0.4)}), 1u);
    SweepConfigResult failed{0.1, 1.0, 1, {}, std::nullopt};
    EXPECT_EQ(best_config({failed, config(2.0, 0.5, 9, 0.0)}), 1u);
    EXPECT_FALSE(best_config({failed}));
}

TEST(CmdSweep, FailedCellsAreRecorded) {
    TempDir dir;
    SweepOptions sw;
    sw.evaluation = small_evaluation(kData / "microban_fixture.txt");
    sw.evaluation.generator.adapter_command = std::string(SOKGEN_ECHO_ADAPTER) + " --malformed";
    sw.evaluation.output = (dir / "sweep.json").string();
    sw.spec = {{1.0}, {1.0}, {1}, {0, 1}, 5, 64};
    std::ostringstream out, err;
    EXPECT_EQ(cmd_sweep(sw, out, err), kExitDomain);
    const auto sweep = nlohmann::json::parse(read(dir / "sweep.json"));
    EXPECT_EQ(sweep["configs"][0]["cells"].size(), 2u);
    EXPECT_TRUE(sweep["configs"][0]["cells"][1].contains("error"));
    EXPECT_TRUE(sweep["best_config"].is_null());
}

TEST(CmdSweep, RerunsAreByteIdentical) {
    TempDir dir;
    SweepOptions sw;
    sw.evaluation = small_evaluation(kData / "microban_fixture.txt");
    sw.spec = {{0.7, 1.3}, {0.9, 1.0}, {1, 3}, {0, 1}, 10, 256};
    std::ostringstream a, b, err;
    sw.evaluation.output = (dir / "a.json").string();
    ASSERT_EQ(cmd_sweep(sw, a, err), kExitOk);
    sw.evaluation.output = (dir / "b.json").string();
    ASSERT_EQ(cmd_sweep(sw, b, err), kExitOk);
    EXPECT_EQ(read(dir / "a.json"), read(dir / "b.json"));
    EXPECT_EQ(a.str(), b.str());
}

TEST(CmdReport, TwoDecimalRendering) {
    TempDir dir;
    write(dir / "r.json", to_json(sample_report(0.5349), "gpt").dump());
    std::ostringstream out, err;
    ASSERT_EQ(cmd_report({{(dir / "r.json").string()}}, out, err), kExitOk);
    EXPECT_NE(out.str().find("| gpt | 0.90    | 0.60        | 0.70      | 0.53  |"), std::string::npos) << out.str();
}

TEST(CmdReport, FourSliceRows) {
    TempDir dir;
    ReportOptions opt;
    for (const char* slice : {"0.1%", "1%", "10%", "100%"}) {
        const auto path = dir / (std::string("slice-") + slice + ".json");
        write(path, to_json(sample_report(0.25), slice).dump());
        opt.inputs.push_back(path.string());
    }
    std::ostringstream out, err;
    ASSERT_EQ(cmd_report(opt, out, err), kExitOk);
    std::size_t lines = 0;
    for (char c : out.str()) lines += c == '\n';
    EXPECT_EQ(lines, 6u);
    EXPECT_EQ(out.str().rfind("| Run  | Novelty | Playability | Diversity | Score |", 0), 0u) << out.str();
}

TEST(CmdReport, EmptyListAndSchemaMismatch) {
    TempDir dir;
    std::ostringstream out, err;
    EXPECT_EQ(run_guarded([&] { return cmd_report({}, out, err); }, err), kExitDomain);
    write(dir / "bad.json", R"({"schema": "other/2"})");
    EXPECT_EQ(run_guarded([&] { return cmd_report({{(dir / "bad.json").string()}}, out, err); }, err), kExitDomain);
    EXPECT_EQ(run_guarded([&] { return cmd_report({{(dir / "missing.json").string()}}, out, err); }, err), kExitIo);
}

TEST(Binary, ExitCodes) {
    TempDir dir;
    write(dir / "dead.txt", fixtures::kCornerDeadlock + "\n");
    write(dir / "ok.txt", fixtures::kOnePush + "\n");
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("solve " + (dir / "ok.txt").string()), 0);
    EXPECT_EQ(run_cli("solve " + (dir / "dead.txt").string()), 1);
    EXPECT_EQ(run_cli("solve " + (dir / "missing.txt").string()), 2);
    EXPECT_EQ(run_cli("report"), 1);
    EXPECT_EQ(run_cli("prepare --microban x --boxoban y -o z"), 1);
}

TEST(Binary, PrepareRerunIsByteIdentical) {
    TempDir dir;
    const std::string base = "prepare --boxoban " + (kData / "boxoban").string() + " --slice 0.01 --seed 7 --annotate -o ";
    ASSERT_EQ(run_cli(base + (dir / "a.txt").string()), 0);
    ASSERT_EQ(run_cli(base + (dir / "b.txt").string()), 0);
    EXPECT_EQ(read(dir / "a.txt"), read(dir / "b.txt"));
}
