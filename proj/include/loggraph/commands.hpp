#pragma once

#include <optional>
#include <string>

#include "loggraph/config.hpp"

namespace loggraph::commands {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitIOError = 3;

struct RunOptions {
    std::string input;  // events file, "-" for stdin
    std::string out_dir;
    std::string config_path;
    std::string ontology_path;  // overrides config
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
};

// Full pipeline over an event stream: store + retrieval index + manifest
// under out_dir.
int cmd_run(const RunOptions& options);

struct EvaluateOptions {
    std::string store_dir;
    std::string gold_path;
    std::string config_path;
    std::string ontology_path;
    std::string json_out;  // optional report copy
    std::string csv_out;   // optional spreadsheet export
    bool geval = false;    // judge-scored semantic fidelity column
    bool print_table = true;
};

int cmd_evaluate(const EvaluateOptions& options);

struct SampleOptions {
    std::string corpus_path;  // one event per line
    std::string out_path;
    int n = 70;
    double threshold = 0.7;
    std::uint64_t seed = 0;
    std::string config_path;
};

int cmd_sample(const SampleOptions& options);

struct TacticsOptions {
    std::string store_dir;
    std::string out_path;
    std::string config_path;
    std::string vocabulary_path;
};

int cmd_tactics(const TacticsOptions& options);

struct ExportOptions {
    std::string store_dir;
    std::string out_path;
    std::string format = "jsonl";  // jsonl | turtle
    std::string ontology_path;
};

int cmd_export(const ExportOptions& options);

}  // namespace loggraph::commands
