#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "json.hpp"
#include "loggraph/llm.hpp"
#include "loggraph/pipeline.hpp"
#include "loggraph/retrieval.hpp"

namespace loggraph::config {

struct EmbeddingConfig {
    enum class Kind { Test, Remote };
    Kind kind = Kind::Test;
    size_t dimension = 64;
    std::uint64_t seed = 0;
    std::string endpoint;  // remote only
    std::string model;     // remote only
};

struct RunConfig {
    llm::BackendConfig backend;
    EmbeddingConfig embedding;
    retrieval::MMRParams retrieval;
    int max_correction_attempts = 3;
    int workers = 1;
    std::uint64_t seed = 0;
    std::string mode = "full";
    std::string ontology_path;          // empty: the shipped descriptor
    std::string tactics_vocabulary;     // empty: the shipped vocabulary
};

// JSON config document; every key optional. Throws ConfigError on malformed
// content or unknown enum values.
RunConfig load_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const RunConfig& config);

std::unique_ptr<retrieval::Embedder> make_embedder(const EmbeddingConfig& config);

pipeline::PipelineConfig pipeline_config(const RunConfig& config);

}  // namespace loggraph::config
