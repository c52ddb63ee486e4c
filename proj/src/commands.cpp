#include "loggraph/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "loggraph/errors.hpp"
#include "loggraph/eval.hpp"
#include "loggraph/store.hpp"
#include "loggraph/util.hpp"
#include "loggraph/validation.hpp"

namespace loggraph::commands {

namespace fs = std::filesystem;

namespace {

config::RunConfig resolve_config(const std::string& config_path) {
    if (config_path.empty()) return config::RunConfig{};
    return config::load_config_file(config_path);
}

std::string resolve_ontology_path(const config::RunConfig& config,
                                  const std::string& cli_override) {
    if (!cli_override.empty()) return cli_override;
    if (!config.ontology_path.empty()) return config.ontology_path;
    return llm::data_dir() + "/ontology.json";
}

std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const auto micros =
        std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count();
    return util::format_datetime(micros);
}

}  // namespace

int cmd_run(const RunOptions& options) {
    config::RunConfig run_config;
    ontology::OntologySchema schema;
    std::string ontology_path;
    try {
        run_config = resolve_config(options.config_path);
        if (options.mode) run_config.mode = *options.mode;
        if (options.seed) run_config.seed = *options.seed;
        if (!pipeline::mode_from_name(run_config.mode)) {
            throw ConfigError("unknown mode \"" + run_config.mode + "\"");
        }
        ontology_path = resolve_ontology_path(run_config, options.ontology_path);
        schema = ontology::load_ontology_file(ontology_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    const std::string started_at = now_iso();
    try {
        std::vector<pipeline::LogEvent> events;
        if (options.input == "-") {
            events = pipeline::parse_event_stream(std::cin);
        } else {
            std::ifstream in(options.input);
            if (!in) {
                std::cerr << "error: cannot open input " << options.input << "\n";
                return kExitIOError;
            }
            events = pipeline::parse_event_stream(in);
        }

        auto graph_store = store::GraphStore::open(options.out_dir);
        retrieval::ExemplarIndex index;
        const fs::path index_dir = fs::path(options.out_dir) / "index";
        if (fs::exists(index_dir / "embeddings.bin")) {
            index = retrieval::ExemplarIndex::load(index_dir.string());
        }
        auto embedder = config::make_embedder(run_config.embedding);
        auto backend = llm::make_backend(run_config.backend);
        pipeline::Pipeline pipe(schema, graph_store, index, *embedder, *backend,
                                config::pipeline_config(run_config));

        // Within a session events run sequentially; sessions run on the
        // configured worker count (1 keeps stores byte-reproducible).
        auto sessions = pipeline::group_sessions(events);
        pipeline::process_sessions(pipe, sessions, run_config.workers);

        if (config::pipeline_config(run_config).mode.retrieval_enabled) {
            index.save((fs::path(options.out_dir) / "index").string());
        }

        const auto& counters = pipe.counters();
        nlohmann::json manifest{
            {"manifest_version", 1},
            {"config", config::config_to_json(run_config)},
            {"descriptor_hash", util::sha256_hex(util::read_file(ontology_path))},
            {"backend", {{"model_id", run_config.backend.model_id}}},
            {"seed", run_config.seed},
            {"started_at", started_at},
            {"finished_at", now_iso()},
            {"counts",
             {{"events", counters.events},
              {"non_empty_graphs", counters.non_empty_graphs},
              {"empty_graphs", counters.empty_graphs},
              {"backend_calls", counters.backend_calls},
              {"correction_calls", counters.correction_calls},
              {"index_reads", counters.index_reads},
              {"index_adds", counters.index_adds},
              {"sessions", sessions.size()}}}};
        util::write_file_atomic((fs::path(options.out_dir) / "manifest.json").string(),
                                manifest.dump(2) + "\n");
        std::cerr << "processed " << counters.events << " events (" << counters.non_empty_graphs
                  << " graphs, " << counters.empty_graphs << " failures)\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIOError;
    }
}

int cmd_evaluate(const EvaluateOptions& options) {
    config::RunConfig run_config;
    ontology::OntologySchema schema;
    try {
        run_config = resolve_config(options.config_path);
        schema = ontology::load_ontology_file(
            resolve_ontology_path(run_config, options.ontology_path));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        auto graph_store = store::GraphStore::open(options.store_dir);
        auto golds = eval::load_gold_file(options.gold_path);

        // Stored graphs are keyed by originating raw log; identical events
        // share one record, so the cursor clamps to the last match.
        std::map<std::string, std::vector<std::string>> by_raw;
        for (const auto& id : graph_store.ids()) {
            const auto& stored = graph_store.fetch_graph(id);
            if (stored.graph.provenance) by_raw[stored.graph.provenance->raw_log].push_back(id);
        }
        std::map<std::string, size_t> cursor;
        std::vector<std::pair<pipeline::LogEvent, kg::KnowledgeGraph>> run;
        std::vector<validation::ValidationReport> reports;
        for (const auto& gold : golds) {
            auto it = by_raw.find(gold.event.raw);
            if (it == by_raw.end()) {
                throw AlignmentError("store has no graph for event \"" + gold.event.raw + "\"");
            }
            size_t& pos = cursor[gold.event.raw];
            const std::string& id = it->second[std::min(pos, it->second.size() - 1)];
            ++pos;
            const auto& stored = graph_store.fetch_graph(id);
            run.emplace_back(gold.event, stored.graph);
            if (!stored.graph.empty()) {
                reports.push_back(validation::check_shapes(stored.graph, schema));
            }
        }
        auto report = eval::run_metrics(run, golds, reports);

        if (options.geval) {
            auto judge = llm::make_backend(run_config.backend);
            double total = 0.0;
            size_t scored = 0;
            for (const auto& [event, graph] : run) {
                if (graph.empty()) continue;
                total += eval::geval_score(event, graph, *judge);
                ++scored;
            }
            std::cout << "geval_score " << (scored > 0 ? total / static_cast<double>(scored) : 0.0)
                      << " over " << scored << " graphs\n";
        }

        if (options.print_table) std::cout << report.to_table();
        if (!options.json_out.empty()) {
            util::write_file_atomic(options.json_out, report.to_json().dump(2) + "\n");
        }
        if (!options.csv_out.empty()) {
            util::write_file_atomic(options.csv_out, report.to_csv());
        }
        return kExitOk;
    } catch (const AlignmentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIOError;
    }
}

int cmd_sample(const SampleOptions& options) {
    config::RunConfig run_config;
    try {
        run_config = resolve_config(options.config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        std::istringstream in(util::read_file(options.corpus_path));
        std::vector<std::string> events;
        std::string line;
        while (std::getline(in, line)) {
            if (!util::trim(line).empty()) events.push_back(line);
        }
        auto embedder = config::make_embedder(run_config.embedding);
        auto selected =
            eval::sample_dataset(events, options.n, options.threshold, options.seed, *embedder);
        std::ostringstream out;
        for (const auto& event : selected) out << event << "\n";
        util::write_file_atomic(options.out_path, out.str());
        std::cerr << "sampled " << selected.size() << " of " << events.size() << " events\n";
        return kExitOk;
    } catch (const DiversityExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIOError;
    }
}

int cmd_tactics(const TacticsOptions& options) {
    config::RunConfig run_config;
    ontology::OntologySchema schema;
    std::vector<std::string> vocabulary;
    try {
        run_config = resolve_config(options.config_path);
        schema = ontology::load_ontology_file(resolve_ontology_path(run_config, ""));
        std::string vocab_path = options.vocabulary_path;
        if (vocab_path.empty()) vocab_path = run_config.tactics_vocabulary;
        vocabulary = vocab_path.empty() ? pipeline::default_tactics_vocabulary()
                                        : pipeline::load_tactics_vocabulary(vocab_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        auto graph_store = store::GraphStore::open(options.store_dir);
        retrieval::ExemplarIndex index;  // unused by the tactics stage
        auto embedder = config::make_embedder(run_config.embedding);
        auto backend = llm::make_backend(run_config.backend);
        pipeline::Pipeline pipe(schema, graph_store, index, *embedder, *backend,
                                config::pipeline_config(run_config));

        std::ostringstream out;
        for (const auto& key : graph_store.session_keys()) {
            pipeline::Session session;
            session.key = key;
            session.graph_ids = graph_store.list_by_session(key);
            auto prediction = pipe.predict_tactics(session, vocabulary);
            nlohmann::json record{{"session_key", prediction.session_key},
                                  {"tactics", prediction.tactics},
                                  {"raw_response", prediction.raw_response}};
            if (prediction.backend_failed) record["error"] = "backend_failed";
            out << record.dump() << "\n";
        }
        util::write_file_atomic(options.out_path, out.str());
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIOError;
    }
}

int cmd_export(const ExportOptions& options) {
    if (options.format != "jsonl" && options.format != "turtle") {
        std::cerr << "error: unknown export format \"" << options.format << "\"\n";
        return kExitConfigError;
    }
    try {
        auto graph_store = store::GraphStore::open(options.store_dir);
        if (options.format == "jsonl") {
            graph_store.export_jsonl(options.out_path);
        } else {
            auto schema = ontology::load_ontology_file(
                options.ontology_path.empty() ? llm::data_dir() + "/ontology.json"
                                              : options.ontology_path);
            graph_store.export_turtle(options.out_path, schema);
        }
        return kExitOk;
    } catch (const DescriptorParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIOError;
    }
}

}  // namespace loggraph::commands
