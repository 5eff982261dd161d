// sokgen: Sokoban level-generation evaluation toolkit.
//
//   sokgen solve     <levels>                      solve every level in a file
//   sokgen prepare   --microban|--boxoban ... -o   build a training corpus
//   sokgen generate  --train <corpus> -n N -o      sample levels to a JSONL file
//   sokgen evaluate  --train <corpus> [--samples]  novelty, playability, diversity, score
//   sokgen sweep     --train <corpus> ...          grid over temperature, top-p, beams
//   sokgen report    <metrics.json>...             render reports as one table

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "sokgen/commands.hpp"

namespace {

using namespace sokgen;
using namespace sokgen::cli;

void add_workers(CLI::App* cmd, std::size_t& workers) {
    workers = default_workers();
    cmd->add_option("-j,--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_cache(CLI::App* cmd, std::string& cache) {
    cmd->add_option("--cache", cache, "Solution cache file (default: $SOKGEN_CACHE, else in memory)");
}

void add_generator(CLI::App* cmd, GeneratorSpec& spec, bool with_train) {
    if (with_train) cmd->add_option("--train", spec.train, "Corpus the n-gram model is trained on")->required();
    cmd->add_option("--order", spec.order, "n-gram context length")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--controlled", spec.controlled, "Prompt with annotations drawn from the training corpus");
    auto* sub = cmd->add_option("--adapter", spec.adapter_command, "External generator command (JSON lines on stdin/stdout)");
    auto* ex = cmd->add_option("--exchange", spec.exchange_dir, "External generator exchange directory");
    sub->excludes(ex);
    cmd->add_option("--adapter-timeout", spec.adapter_timeout, "Seconds to wait for an external generator")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void add_params(CLI::App* cmd, GenerationParams& p) {
    cmd->add_option("-t,--temperature", p.temperature, "Sampling temperature (0 = greedy)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--top-p", p.top_p, "Nucleus mass in (0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--beams", p.beams, "Sampled beams per generation call")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-chars", p.max_chars, "Maximum generated characters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", p.seed, "Random seed")->capture_default_str();
}

void add_evaluation(CLI::App* cmd, EvaluateOptions& e) {
    cmd->add_option("--train", e.train, "Training corpus novelty is measured against")->required();
    cmd->add_option("--generator-train", e.generator.train, "Corpus for the n-gram model (default: --train)");
    cmd->add_option("-k", e.k, "Edit distance threshold for novelty and distinctness")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--budget", e.budget, "Solver node expansion budget")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--clique-cap", e.clique_cap, "Max-clique iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--tol-prop-empty", e.tolerances.prop_empty, "Accuracy tolerance on prop_empty")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--tol-solution-len", e.tolerances.solution_len, "Accuracy tolerance on solution_len")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    add_generator(cmd, e.generator, false);
    add_cache(cmd, e.cache);
    add_workers(cmd, e.workers);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sokoban level-generation evaluation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "sokgen 1.0.0");

    SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve", "Solve every level in a file");
    solve_cmd->add_option("input", solve.input, "Level file")->required();
    solve_cmd->add_option("--budget", solve.budget, "Node expansion budget")->check(CLI::PositiveNumber)->capture_default_str();
    bool no_pruning = false;
    solve_cmd->add_flag("--no-deadlock-pruning", no_pruning, "Disable corner deadlock pruning");
    add_cache(solve_cmd, solve.cache);
    add_workers(solve_cmd, solve.workers);

    PrepareOptions prepare;
    auto* prepare_cmd = app.add_subcommand("prepare", "Build a training corpus file");
    auto* mb = prepare_cmd->add_option("--microban", prepare.microban, "Microban-format level file");
    auto* bb = prepare_cmd->add_option("--boxoban", prepare.boxoban, "Boxoban file or directory");
    mb->excludes(bb);
    double slice_fraction = 0;
    auto* slice_opt = prepare_cmd->add_option("--slice", slice_fraction, "Keep this fraction of the levels")
                          ->check(CLI::Range(0.0, 1.0));
    prepare_cmd->add_option("--seed", prepare.seed, "Slice seed")->capture_default_str();
    const std::map<std::string, Augmentation> schemes = {
        {"none", Augmentation::None}, {"flip", Augmentation::Flip}, {"flip-rotate", Augmentation::FlipRotate}};
    prepare_cmd->add_option("--augment", prepare.augment, "none, flip or flip-rotate")
        ->transform(CLI::CheckedTransformer(schemes, CLI::ignore_case));
    prepare_cmd->add_flag("--annotate", prepare.annotate, "Prefix each level with prop_empty and solution_len");
    prepare_cmd->add_option("--budget", prepare.budget, "Solver budget for annotation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    prepare_cmd->add_option("-o,--output", prepare.output, "Output corpus file")->required();
    add_cache(prepare_cmd, prepare.cache);
    add_workers(prepare_cmd, prepare.workers);

    GenerateOptions gen;
    auto* gen_cmd = app.add_subcommand("generate", "Sample levels to a JSONL file");
    add_generator(gen_cmd, gen.generator, true);
    add_params(gen_cmd, gen.params);
    gen_cmd->add_option("-n,--samples", gen.n, "Number of samples")->check(CLI::PositiveNumber)->capture_default_str();
    gen_cmd->add_option("-o,--output", gen.output, "Samples file")->required();

    EvaluateOptions eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score samples against a training corpus");
    eval_cmd->add_option("--samples", eval.samples, "Samples JSONL file (default: generate)");
    add_evaluation(eval_cmd, eval);
    add_params(eval_cmd, eval.params);
    eval_cmd->add_option("-n", eval.n, "Samples to generate when no file is given")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    eval_cmd->add_option("-o,--output", eval.output, "Metrics report JSON");
    eval_cmd->add_option("--label", eval.label, "Run label stored in the report");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid search over generation settings");
    add_evaluation(sweep_cmd, sweep.evaluation);
    sweep_cmd->add_option("--temperatures", sweep.spec.temperatures, "Temperatures")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--top-ps", sweep.spec.top_ps, "Top-p values")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--beams", sweep.spec.beam_counts, "Beam counts")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("--seeds", sweep.spec.seeds, "Seeds")->delimiter(',')->capture_default_str();
    sweep_cmd->add_option("-n,--samples-per-config", sweep.spec.samples_per_config, "Samples per cell")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--max-chars", sweep.spec.max_chars, "Maximum generated characters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("-o,--output", sweep.evaluation.output, "Sweep result JSON");

    ReportOptions report;
    auto* report_cmd = app.add_subcommand("report", "Render metrics reports as a table");
    report_cmd->add_option("reports", report.inputs, "Metrics report files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitDomain;
    }

    auto& out = std::cout;
    auto& err = std::cerr;
    return run_guarded(
        [&] {
            if (*solve_cmd) {
                solve.deadlock_pruning = !no_pruning;
                return cmd_solve(solve, out, err);
            }
            if (*prepare_cmd) {
                if (*slice_opt) prepare.slice = slice_fraction;
                return cmd_prepare(prepare, out, err);
            }
            if (*gen_cmd) return cmd_generate(gen, out, err);
            if (*eval_cmd) return cmd_evaluate(eval, out, err);
            if (*sweep_cmd) return cmd_sweep(sweep, out, err);
            return cmd_report(report, out, err);
        },
        err);
}
