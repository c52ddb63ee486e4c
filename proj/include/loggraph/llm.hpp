#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "loggraph/kg.hpp"
#include "loggraph/ontology.hpp"
#include "loggraph/validation.hpp"

namespace loggraph::llm {

enum class Role { System, User, Assistant, Tool };

const char* role_name(Role r);

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    std::optional<nlohmann::json> tool_payload;

    bool operator==(const ChatMessage&) const = default;
};

struct RetryPolicy {
    int count = 2;
    double backoff_s = 0.5;
};

struct BackendConfig {
    enum class Kind { Remote, Stub };
    Kind kind = Kind::Stub;
    std::string endpoint;  // required for remote
    std::string model_id = "stub";
    double temperature = 0.7;
    int timeout_s = 60;
    RetryPolicy retry;
    std::string api_key_env;       // name of the env var holding the credential
    std::string fixtures_path;     // stub response fixture file
};

struct GenerationRequest {
    std::vector<ChatMessage> messages;
    nlohmann::json output_schema;  // tool definition; null => plain text response
    double temperature = 0.7;
    int max_attempts_remaining = 3;
};

// Prompt texts live under <data-dir>/prompts; the data dir defaults to the
// compiled-in path and can be overridden with the LOGGRAPH_DATA_DIR env var.
std::string data_dir();
std::string load_prompt(const std::string& name);

// Tool definition carrying the structured-output schema: valid classes and
// relationship types are enumerated from the ontology.
nlohmann::json output_schema_for(const ontology::OntologySchema& schema);

struct Exemplar {
    std::string log_text;
    std::optional<std::string> context_text;
    kg::KnowledgeGraph graph;
};

// The final user message for a log event; also the stub-response key input.
std::string render_event_message(const std::string& raw_log,
                                 const std::optional<std::string>& context);

// System prompt (main when structured output is on, baseline otherwise, slots
// filled from the schema), few-shot exemplars as user/assistant pairs, then
// the event itself.
std::vector<ChatMessage> build_generation_prompt(const std::string& raw_log,
                                                 const std::optional<std::string>& context,
                                                 const std::vector<Exemplar>& examples,
                                                 const ontology::OntologySchema& schema,
                                                 bool structured_output);

// Appends the failed output as an assistant turn plus a user turn listing one
// bullet per violation, sorted by (stage, code, location).
std::vector<ChatMessage> build_correction_prompt(const std::vector<ChatMessage>& prior,
                                                 const std::string& failed_output,
                                                 const validation::ValidationReport& report);

// System prompt verbatim; one serialized canonical graph block per session
// entry, in session order.
std::vector<ChatMessage> build_tactics_prompt(const std::vector<kg::KnowledgeGraph>& session_graphs);

std::vector<ChatMessage> build_geval_prompt(const std::string& raw_log,
                                            const kg::KnowledgeGraph& graph);

class Backend {
public:
    virtual ~Backend() = default;
    // Returns the raw structured output (tool-call arguments) or, without an
    // output schema, the plain text answer.
    virtual std::string invoke(const GenerationRequest& request) = 0;
    virtual std::string model_id() const = 0;
};

// Deterministic offline backend. Responses come from a fixture file:
//   {"responses": {"<fnv1a64 hex of final user message>": ["...", ...]},
//    "script": ["...", ...], "default": "..."}
// A non-empty script queue takes precedence and is consumed call by call;
// keyed entries are consumed per key with the last response sticking.
class StubBackend : public Backend {
public:
    explicit StubBackend(std::string model_id = "stub");
    static StubBackend from_file(const std::string& path, std::string model_id = "stub");

    void add_keyed_response(const std::string& final_user_message, const std::string& response);
    void push_script(const std::string& response);
    void set_default_response(const std::string& response);

    static std::string key_for(const std::string& final_user_message);

    std::string invoke(const GenerationRequest& request) override;
    std::string model_id() const override { return model_id_; }

    int calls() const { return calls_; }

private:
    std::string model_id_;
    std::map<std::string, std::vector<std::string>> keyed_;
    std::map<std::string, size_t> keyed_cursor_;
    std::vector<std::string> script_;
    size_t script_cursor_ = 0;
    std::optional<std::string> default_response_;
    int calls_ = 0;
};

// Chat-completions-style HTTP client; the output schema travels as a tool
// definition and the first tool call's arguments come back verbatim.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(BackendConfig config);
    std::string invoke(const GenerationRequest& request) override;
    std::string model_id() const override { return config_.model_id; }

    // Exposed for tests: the exact request body sent over the wire.
    nlohmann::json request_body(const GenerationRequest& request) const;

private:
    BackendConfig config_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace loggraph::llm
