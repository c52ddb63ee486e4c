#include "loggraph/config.hpp"

#include "loggraph/errors.hpp"
#include "loggraph/util.hpp"

namespace loggraph::config {

RunConfig load_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    RunConfig config;

    if (doc.contains("backend")) {
        const auto& b = doc["backend"];
        if (!b.is_object()) throw ConfigError("'backend' must be an object");
        const std::string kind = b.value("kind", "stub");
        if (kind == "stub") {
            config.backend.kind = llm::BackendConfig::Kind::Stub;
        } else if (kind == "remote") {
            config.backend.kind = llm::BackendConfig::Kind::Remote;
        } else {
            throw ConfigError("backend.kind must be \"remote\" or \"stub\", got \"" + kind + "\"");
        }
        config.backend.endpoint = b.value("endpoint", "");
        config.backend.model_id = b.value("model_id", kind == "stub" ? "stub" : "");
        config.backend.temperature = b.value("temperature", 0.7);
        config.backend.timeout_s = b.value("timeout_s", 60);
        config.backend.api_key_env = b.value("api_key_env", "");
        config.backend.fixtures_path = b.value("fixtures", "");
        if (b.contains("retry")) {
            config.backend.retry.count = b["retry"].value("count", 2);
            config.backend.retry.backoff_s = b["retry"].value("backoff_s", 0.5);
        }
        if (config.backend.kind == llm::BackendConfig::Kind::Remote &&
            config.backend.endpoint.empty()) {
            throw ConfigError("backend.kind \"remote\" requires backend.endpoint");
        }
    }

    if (doc.contains("embedding")) {
        const auto& e = doc["embedding"];
        if (!e.is_object()) throw ConfigError("'embedding' must be an object");
        const std::string kind = e.value("kind", "test");
        if (kind == "test") {
            config.embedding.kind = EmbeddingConfig::Kind::Test;
        } else if (kind == "remote") {
            config.embedding.kind = EmbeddingConfig::Kind::Remote;
        } else {
            throw ConfigError("embedding.kind must be \"remote\" or \"test\", got \"" + kind + "\"");
        }
        config.embedding.dimension = e.value("dimension", static_cast<size_t>(64));
        config.embedding.seed = e.value("seed", static_cast<std::uint64_t>(0));
        config.embedding.endpoint = e.value("endpoint", "");
        config.embedding.model = e.value("model", "");
        if (config.embedding.kind == EmbeddingConfig::Kind::Remote &&
            config.embedding.endpoint.empty()) {
            throw ConfigError("embedding.kind \"remote\" requires embedding.endpoint");
        }
    }

    if (doc.contains("retrieval")) {
        const auto& r = doc["retrieval"];
        if (!r.is_object()) throw ConfigError("'retrieval' must be an object");
        config.retrieval.lambda = r.value("lambda", 0.5);
        config.retrieval.select_count = r.value("select", 5);
        config.retrieval.candidate_pool = r.value("pool", 20);
        if (config.retrieval.lambda < 0.0 || config.retrieval.lambda > 1.0) {
            throw ConfigError("retrieval.lambda must lie in [0, 1]");
        }
        if (config.retrieval.select_count < 1 ||
            config.retrieval.select_count > config.retrieval.candidate_pool) {
            throw ConfigError("retrieval.select must satisfy 1 <= select <= pool");
        }
    }

    if (doc.contains("pipeline")) {
        const auto& p = doc["pipeline"];
        if (!p.is_object()) throw ConfigError("'pipeline' must be an object");
        config.max_correction_attempts = p.value("max_correction_attempts", 3);
        config.workers = p.value("workers", 1);
        if (config.max_correction_attempts < 0) {
            throw ConfigError("pipeline.max_correction_attempts must be >= 0");
        }
        if (config.workers < 1) throw ConfigError("pipeline.workers must be >= 1");
    }

    config.seed = doc.value("seed", static_cast<std::uint64_t>(0));
    config.mode = doc.value("mode", "full");
    config.ontology_path = doc.value("ontology", "");
    config.tactics_vocabulary = doc.value("tactics_vocabulary", "");
    if (!pipeline::mode_from_name(config.mode)) {
        throw ConfigError("unknown mode \"" + config.mode + "\"");
    }
    return config;
}

RunConfig load_config_file(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(util::read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return load_config(doc);
}

nlohmann::json config_to_json(const RunConfig& config) {
    return nlohmann::json{
        {"backend",
         {{"kind", config.backend.kind == llm::BackendConfig::Kind::Stub ? "stub" : "remote"},
          {"endpoint", config.backend.endpoint},
          {"model_id", config.backend.model_id},
          {"temperature", config.backend.temperature},
          {"timeout_s", config.backend.timeout_s},
          {"api_key_env", config.backend.api_key_env},
          {"fixtures", config.backend.fixtures_path},
          {"retry",
           {{"count", config.backend.retry.count}, {"backoff_s", config.backend.retry.backoff_s}}}}},
        {"embedding",
         {{"kind", config.embedding.kind == EmbeddingConfig::Kind::Test ? "test" : "remote"},
          {"dimension", config.embedding.dimension},
          {"seed", config.embedding.seed},
          {"endpoint", config.embedding.endpoint},
          {"model", config.embedding.model}}},
        {"retrieval",
         {{"lambda", config.retrieval.lambda},
          {"select", config.retrieval.select_count},
          {"pool", config.retrieval.candidate_pool}}},
        {"pipeline",
         {{"max_correction_attempts", config.max_correction_attempts},
          {"workers", config.workers}}},
        {"seed", config.seed},
        {"mode", config.mode},
        {"ontology", config.ontology_path},
        {"tactics_vocabulary", config.tactics_vocabulary}};
}

std::unique_ptr<retrieval::Embedder> make_embedder(const EmbeddingConfig& config) {
    if (config.kind == EmbeddingConfig::Kind::Test) {
        return std::make_unique<retrieval::HashingEmbedder>(config.dimension, config.seed);
    }
    return std::make_unique<retrieval::RemoteEmbedder>(config.endpoint, config.model,
                                                       config.dimension);
}

pipeline::PipelineConfig pipeline_config(const RunConfig& config) {
    pipeline::PipelineConfig out;
    out.max_correction_attempts = config.max_correction_attempts;
    out.retrieval_params = config.retrieval;
    out.mode = *pipeline::mode_from_name(config.mode);
    out.temperature = config.backend.temperature;
    out.workers = config.workers;
    return out;
}

}  // namespace loggraph::config
