#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "loggraph/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"loggraph: log events -> ontology-grounded knowledge graphs"};
    app.require_subcommand(1);

    using namespace loggraph::commands;

    RunOptions run_options;
    auto* run = app.add_subcommand("run", "Process an event stream into a graph store");
    run->add_option("--input", run_options.input, "Events file (JSON lines or text), '-' for stdin")
        ->required();
    run->add_option("--out", run_options.out_dir, "Store directory")->required();
    run->add_option("--config", run_options.config_path, "Config file (JSON)");
    run->add_option("--ontology", run_options.ontology_path, "Ontology descriptor override");
    std::string mode;
    run->add_option("--mode", mode,
                    "baseline | retrieval | structured | structured-corr | full");
    std::uint64_t seed = 0;
    auto* seed_opt = run->add_option("--seed", seed, "Run seed override");

    EvaluateOptions eval_options;
    auto* evaluate = app.add_subcommand("evaluate", "Score a store against a gold dataset");
    evaluate->add_option("--store", eval_options.store_dir, "Store directory")->required();
    evaluate->add_option("--gold", eval_options.gold_path, "Gold JSON-lines file")->required();
    evaluate->add_option("--config", eval_options.config_path, "Config file (JSON)");
    evaluate->add_option("--ontology", eval_options.ontology_path, "Ontology descriptor override");
    evaluate->add_option("--json", eval_options.json_out, "Write the report as JSON");
    evaluate->add_option("--csv", eval_options.csv_out, "Write the report as CSV");
    evaluate->add_flag("--geval", eval_options.geval, "Also run judge-based scoring");

    SampleOptions sample_options;
    auto* sample = app.add_subcommand("sample", "Diversity-sample a dataset from a corpus");
    sample->add_option("--corpus", sample_options.corpus_path, "Corpus file, one event per line")
        ->required();
    sample->add_option("--out", sample_options.out_path, "Output dataset file")->required();
    sample->add_option("--n", sample_options.n, "Number of events to select");
    sample->add_option("--threshold", sample_options.threshold, "Minimum pairwise cosine distance");
    sample->add_option("--seed", sample_options.seed, "Sampler seed");
    sample->add_option("--config", sample_options.config_path, "Config file (JSON)");

    TacticsOptions tactics_options;
    auto* tactics = app.add_subcommand("tactics", "Predict session tactics from a store");
    tactics->add_option("--store", tactics_options.store_dir, "Store directory")->required();
    tactics->add_option("--out", tactics_options.out_path, "Predictions file (JSON lines)")
        ->required();
    tactics->add_option("--config", tactics_options.config_path, "Config file (JSON)");
    tactics->add_option("--vocabulary", tactics_options.vocabulary_path,
                        "Tactic vocabulary file override");

    ExportOptions export_options;
    auto* exporter = app.add_subcommand("export", "Export stored graphs");
    exporter->add_option("--store", export_options.store_dir, "Store directory")->required();
    exporter->add_option("--out", export_options.out_path, "Output file")->required();
    exporter->add_option("--format", export_options.format, "jsonl | turtle");
    exporter->add_option("--ontology", export_options.ontology_path,
                         "Ontology descriptor override");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (!mode.empty()) run_options.mode = mode;
        if (seed_opt->count() > 0) run_options.seed = seed;
        return cmd_run(run_options);
    }
    if (evaluate->parsed()) return cmd_evaluate(eval_options);
    if (sample->parsed()) return cmd_sample(sample_options);
    if (tactics->parsed()) return cmd_tactics(tactics_options);
    if (exporter->parsed()) return cmd_export(export_options);
    return kExitConfigError;
}
