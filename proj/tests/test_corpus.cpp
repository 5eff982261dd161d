#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "sokgen/corpus.hpp"
#include "support/fixtures.hpp"

using namespace sokgen;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SOKGEN_TEST_DATA;

class TempDir {
  public:
    TempDir() : path_(fs::temp_directory_path() / ("sokgen-test-" + std::to_string(::getpid()) + "-" +
                                                   std::to_string(counter_++))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

  private:
    static inline int counter_ = 0;
    fs::path path_;
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(LoadMicroban, TwoLevelsAndComments) {
    const auto corpus = parse_microban("; 1\n####\n#@$.\n####\n\n; 2\n; a second comment\n######\n#@ $.#\n######\n");
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(serialize(corpus.levels[0]), "####\n#@$.\n####");
    EXPECT_EQ(serialize(corpus.levels[1]), "######\n#@-$.#\n######");
    EXPECT_EQ(corpus.provenance[1], "microban:a second comment");
}

TEST(LoadMicroban, FixtureFile) {
    const auto corpus = load_microban(kData / "microban_fixture.txt");
    EXPECT_EQ(corpus.size(), 34u);
    EXPECT_EQ(serialize(corpus.levels[0]), fixtures::kFigureLeft);
    EXPECT_EQ(serialize(corpus.levels[1]), fixtures::kFigureRight);
    // Ragged rows are wall-padded on the right; spaces become floor.
    EXPECT_EQ(serialize(corpus.levels[2]), "######\n#-.###\n#--###\n#*@--#\n#--$-#\n#--###\n######");
    EXPECT_EQ(serialize(corpus.levels[3]), "-#####\n-#---#\n##$#-#\n#-.-@#\n#---##\n######");
    for (const auto& level : corpus.levels) EXPECT_TRUE(validate(level).verdict);
}

TEST(LoadMicroban, Errors) {
    EXPECT_THROW(load_microban(kData / "does-not-exist.txt"), CorpusError);
    try {
        parse_microban("####\n#@$.\n####\n\n####\n#@x.\n####\n");
        FAIL();
    } catch (const CorpusError& e) {
        EXPECT_EQ(e.kind(), CorpusError::Kind::Parse);
        EXPECT_EQ(e.level_index(), 1u);
    }
}

TEST(LoadBoxoban, FixtureFile) {
    const auto corpus = load_boxoban(kData / "boxoban" / "000.txt");
    ASSERT_EQ(corpus.size(), 1000u);
    for (const auto& level : corpus.levels) {
        EXPECT_EQ(level.width(), 10u);
        EXPECT_EQ(level.height(), 10u);
        const auto report = validate(level);
        EXPECT_EQ(report.box_count, 4);
        EXPECT_EQ(report.goal_count, 4);
    }
    EXPECT_EQ(corpus.provenance[3], "000.txt:3");
    EXPECT_EQ(load_boxoban(kData / "boxoban").size(), 1000u);
}

TEST(LoadBoxoban, ShapeErrorAndEmptyDirectory) {
    TempDir dir;
    write(dir.path() / "bad.txt",
          "; 0\n##########\n#@ $  .  ##\n##########\n##########\n##########\n##########\n##########\n##########\n"
          "##########\n##########\n");
    try {
        load_boxoban(dir.path() / "bad.txt");
        FAIL();
    } catch (const CorpusError& e) {
        EXPECT_EQ(e.kind(), CorpusError::Kind::Shape);
    }
    TempDir empty;
    Diagnostics diag;
    EXPECT_EQ(load_boxoban(empty.path(), &diag).size(), 0u);
    EXPECT_EQ(diag.warnings.size(), 1u);
}

TEST(Slice, Contract) {
    const auto corpus = load_boxoban(kData / "boxoban");
    const auto whole = slice(corpus, 1.0, 3);
    EXPECT_EQ(whole.levels, corpus.levels);

    EXPECT_EQ(slice_size(438000, 0.01), 4380u);
    EXPECT_EQ(slice_size(438000, 0.001), 438u);
    EXPECT_EQ(slice_size(438000, 0.1), 43800u);
    EXPECT_EQ(slice_size(1000, 0.001), 1u);
    EXPECT_EQ(slice_size(999, 0.01), 10u);

    const auto a = slice(corpus, 0.01, 7);
    const auto b = slice(corpus, 0.01, 7);
    const auto c = slice(corpus, 0.01, 8);
    EXPECT_EQ(a.size(), 10u);
    EXPECT_EQ(a.levels, b.levels);
    EXPECT_EQ(a.provenance, b.provenance);
    EXPECT_NE(a.provenance, c.provenance);
    std::set<std::string> unique(a.provenance.begin(), a.provenance.end());
    EXPECT_EQ(unique.size(), a.size());

    EXPECT_THROW(slice(corpus, 0.0, 1), std::invalid_argument);
    EXPECT_THROW(slice(corpus, 1.5, 1), std::invalid_argument);
}

TEST(Augment, CountsAndDedup) {
    Corpus symmetric;
    symmetric.add(parse_level("#####\n#.$@#\n#####"), "s");  // equal to its FlipX
    const auto flipped = augment(symmetric, Augmentation::Flip);
    ASSERT_EQ(flipped.size(), 2u);
    EXPECT_EQ(serialize(flipped.levels[1]), "#####\n#@$.#\n#####");

    const auto corpus = load_microban(kData / "microban_fixture.txt");
    const auto flip = augment(corpus, Augmentation::Flip);
    const auto rotate = augment(corpus, Augmentation::FlipRotate);
    EXPECT_LE(flip.size(), 3 * corpus.size());
    EXPECT_LE(rotate.size(), 5 * corpus.size());
    EXPECT_GT(flip.size(), corpus.size());
    EXPECT_GT(rotate.size(), flip.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(flip.levels[i], corpus.levels[i]);
    std::set<std::string> seen;
    for (const auto& level : rotate.levels) EXPECT_TRUE(seen.insert(serialize(level)).second);
    EXPECT_EQ(augment(corpus, Augmentation::None).levels, corpus.levels);
}

TEST(Augment, PreservesSolveStatus) {
    auto corpus = load_microban(kData / "microban_fixture.txt");
    corpus.levels.erase(corpus.levels.begin() + 20, corpus.levels.end());
    corpus.provenance.erase(corpus.provenance.begin() + 20, corpus.provenance.end());
    const auto augmented = augment(corpus, Augmentation::FlipRotate);
    for (std::size_t i = 0; i < augmented.size(); ++i) {
        const auto& source = augmented.provenance[i];
        const auto original = std::find(corpus.provenance.begin(), corpus.provenance.end(),
                                        source.substr(0, source.find('/')));
        ASSERT_NE(original, corpus.provenance.end());
        const auto a = solve(augmented.levels[i]);
        const auto b = solve(corpus.levels[static_cast<std::size_t>(original - corpus.provenance.begin())]);
        EXPECT_EQ(a.status, b.status);
        EXPECT_EQ(a.solution_len, b.solution_len);
    }
}

TEST(Annotate, FigureLevels) {
    Corpus corpus;
    corpus.add(parse_level(fixtures::kFigureLeft), "left");
    corpus.add(parse_level(fixtures::kFigureRight), "right");
    const auto result = annotate(corpus, {});
    ASSERT_EQ(result.entries.size(), 2u);
    const std::string text = format_annotated(result.entries);
    EXPECT_TRUE(text.starts_with("prop_empty: 0.25\nsolution_len: 65\n########\n")) << text;
    EXPECT_NE(text.find("\n\nprop_empty: 0.269\nsolution_len: 42\n#########\n"), std::string::npos) << text;
}

TEST(Annotate, SkipsUnsolvable) {
    const auto corpus = load_microban(kData / "unsolvable.txt");
    Diagnostics diag;
    const auto result = annotate(corpus, {}, nullptr, 2, &diag);
    EXPECT_EQ(result.entries.size(), 2u);
    EXPECT_EQ(result.skipped, std::vector<std::size_t>{1});
    ASSERT_EQ(diag.warnings.size(), 1u);
    EXPECT_NE(diag.warnings[0].find("skipped 1"), std::string::npos);
}

TEST(Annotate, SoundAndRoundTrips) {
    auto corpus = load_microban(kData / "microban_fixture.txt");
    const auto result = annotate(corpus, {});
    const auto parsed = parse_corpus_file(format_annotated(result.entries));
    ASSERT_EQ(parsed.size(), result.entries.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        ASSERT_TRUE(parsed[i].annotation);
        EXPECT_EQ(parsed[i].level, result.entries[i].level);
        EXPECT_EQ(parsed[i].annotation->prop_empty_milli, prop_empty_milli(parsed[i].level));
        EXPECT_EQ(parsed[i].annotation->solution_len, solve(parsed[i].level).solution_len);
    }
    const auto plain = parse_corpus_file(format_plain(corpus));
    ASSERT_EQ(plain.size(), corpus.size());
    EXPECT_FALSE(plain[0].annotation);
}

TEST(Cache, PutGetAndBudgetRule) {
    TempDir dir;
    const auto path = (dir.path() / "cache.jsonl").string();
    const SolutionCacheEntry solved{"aaaa", SolveStatus::Solved, 12, 500, 150000, true};
    const SolutionCacheEntry exhausted{"bbbb", SolveStatus::ExhaustedBudget, std::nullopt, 50000, 50000, true};
    {
        SolutionCache cache(path);
        cache.put(solved);
        cache.put(exhausted);
        EXPECT_EQ(cache.get("aaaa", 150000), solved);
    }
    SolutionCache reloaded(path);
    EXPECT_EQ(reloaded.get("aaaa", 150000), solved);
    EXPECT_FALSE(reloaded.get("bbbb", 150000));
    EXPECT_EQ(reloaded.get("bbbb", 40000)->status, SolveStatus::ExhaustedBudget);
    EXPECT_FALSE(reloaded.get("cccc", 10));
    EXPECT_FALSE(reloaded.get("aaaa", 150000, false));
    // A finished search that needed more expansions than allowed would have
    // run out of budget.
    const auto small = reloaded.get("aaaa", 100);
    ASSERT_TRUE(small);
    EXPECT_EQ(small->status, SolveStatus::ExhaustedBudget);
    EXPECT_EQ(small->nodes_expanded, 100);
}

TEST(Cache, CorruptedLinesAreSkipped) {
    TempDir dir;
    const auto path = dir.path() / "cache.jsonl";
    write(path,
          "{\"level_hash\":\"aaaa\",\"status\":\"solved\",\"solution_len\":3,\"nodes_expanded\":9,\"budget\":150000,"
          "\"deadlock_pruning\":true}\n"
          "{not json\n"
          "{\"level_hash\":\"bbbb\",\"status\":\"bogus\"}\n"
          "{\"level_hash\":\"cccc\",\"status\":\"proved_unsolvable\",\"solution_len\":null,\"nodes_expanded\":4,"
          "\"budget\":150000,\"deadlock_pruning\":true}\n");
    SolutionCache cache(path.string());
    EXPECT_EQ(cache.warnings().size(), 2u);
    EXPECT_EQ(cache.get("aaaa", 150000)->solution_len, 3);
    EXPECT_EQ(cache.get("cccc", 150000)->status, SolveStatus::ProvedUnsolvable);
}

TEST(Cache, SolveCachedMatchesSolve) {
    TempDir dir;
    SolutionCache cache((dir.path() / "c.jsonl").string());
    const Level level = parse_level(fixtures::kFigureRight);
    const auto first = solve_cached(level, {}, &cache);
    const auto second = solve_cached(level, {}, &cache);
    EXPECT_EQ(first.solution_len, 42);
    EXPECT_EQ(second.solution_len, 42);
    EXPECT_EQ(second.nodes_expanded, first.nodes_expanded);
    EXPECT_TRUE(second.moves.empty());
    const auto tight = solve_cached(level, {10, true}, &cache);
    EXPECT_EQ(tight.status, SolveStatus::ExhaustedBudget);
    EXPECT_EQ(level_hash(level), level_hash(serialize(level)));
    EXPECT_EQ(level_hash(level).size(), 16u);
}

TEST(Cache, UnwritablePathFallsBackToMemory) {
    SolutionCache cache("/nonexistent-dir/sub/cache.jsonl");
    cache.put({"aaaa", SolveStatus::Solved, 1, 1, 10, true});
    EXPECT_TRUE(cache.get("aaaa", 10));
    EXPECT_EQ(cache.warnings().size(), 1u);
}
