#include "loggraph/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "loggraph/errors.hpp"
#include "loggraph/util.hpp"

#ifndef LOGGRAPH_DATA_DIR
#define LOGGRAPH_DATA_DIR "data"
#endif

namespace loggraph::llm {

const char* role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool: return "tool";
    }
    return "user";
}

std::string data_dir() {
    if (const char* env = std::getenv("LOGGRAPH_DATA_DIR"); env && *env) return env;
    return LOGGRAPH_DATA_DIR;
}

std::string load_prompt(const std::string& name) {
    std::string text = util::read_file(data_dir() + "/prompts/" + name + ".md");
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

nlohmann::json output_schema_for(const ontology::OntologySchema& schema) {
    nlohmann::json node_types = nlohmann::json::array();
    for (const auto& [name, def] : schema.classes()) {
        if (!def.abstract) node_types.push_back(name);
    }
    std::vector<std::string> rel_names;
    for (const auto& rel : schema.relationships()) {
        if (std::find(rel_names.begin(), rel_names.end(), rel.name) == rel_names.end()) {
            rel_names.push_back(rel.name);
        }
    }
    std::sort(rel_names.begin(), rel_names.end());

    nlohmann::json node_schema{
        {"type", "object"},
        {"properties",
         {{"id", {{"type", "string"}}},
          {"type", {{"type", "string"}, {"enum", node_types}}},
          {"properties", {{"type", "object"}}}}},
        {"required", nlohmann::json::array({"id", "type"})}};
    nlohmann::json rel_schema{
        {"type", "object"},
        {"properties",
         {{"source", {{"type", "string"}}},
          {"target", {{"type", "string"}}},
          {"type", {{"type", "string"}, {"enum", rel_names}}}}},
        {"required", nlohmann::json::array({"source", "target", "type"})}};
    return nlohmann::json{
        {"name", "knowledge_graph"},
        {"description", "Record the knowledge graph extracted from the log event."},
        {"parameters",
         {{"type", "object"},
          {"properties",
           {{"nodes", {{"type", "array"}, {"items", node_schema}}},
            {"relationships", {{"type", "array"}, {"items", rel_schema}}}}},
          {"required", nlohmann::json::array({"nodes", "relationships"})}}}};
}

std::string render_event_message(const std::string& raw_log,
                                 const std::optional<std::string>& context) {
    std::string out = "Log event:\n" + raw_log;
    if (context && !context->empty()) out += "\n\nContext:\n" + *context;
    return out;
}

namespace {

std::string replace_slot(std::string text, const std::string& slot, const std::string& value) {
    const std::string needle = "{{" + slot + "}}";
    auto pos = text.find(needle);
    if (pos != std::string::npos) text.replace(pos, needle.size(), value);
    return text;
}

std::string render_baseline_system(const ontology::OntologySchema& schema) {
    std::string text = load_prompt("baseline");
    text = replace_slot(text, "output_format", output_schema_for(schema)["parameters"].dump(2));

    std::string props;
    for (const auto& [name, def] : schema.classes()) {
        if (def.abstract) continue;
        props += "\n- " + name + ": ";
        bool first = true;
        for (const auto& [pname, pdef] : schema.flattened_properties(name)) {
            if (!first) props += ", ";
            props += pname + " (" + ontology::datatype_name(pdef.datatype) +
                     (pdef.required ? ", required" : "") + ")";
            first = false;
        }
        if (first) props += "none";
    }
    text = replace_slot(text, "properties_schema", props);

    std::string triples;
    for (const auto& [src, rel, tgt] : schema.allowed_triples()) {
        if (!triples.empty()) triples += ", ";
        triples += "(" + src + ", " + rel + ", " + tgt + ")";
    }
    text = replace_slot(text, "triples", triples);

    std::string structural;
    auto sorted = schema.structural_triples();
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [src, rel, tgt] : sorted) {
        if (!structural.empty()) structural += ", ";
        structural += "(" + src + ", " + rel + ", " + tgt + ")";
    }
    text = replace_slot(text, "structural_triples", structural);
    return text;
}

}  // namespace

std::vector<ChatMessage> build_generation_prompt(const std::string& raw_log,
                                                 const std::optional<std::string>& context,
                                                 const std::vector<Exemplar>& examples,
                                                 const ontology::OntologySchema& schema,
                                                 bool structured_output) {
    std::vector<ChatMessage> messages;
    messages.push_back(ChatMessage{
        Role::System, structured_output ? load_prompt("main") : render_baseline_system(schema),
        std::nullopt});
    for (const auto& example : examples) {
        messages.push_back(ChatMessage{
            Role::User, render_event_message(example.log_text, example.context_text), std::nullopt});
        messages.push_back(ChatMessage{
            Role::Assistant, kg::serialize_graph_pretty(kg::canonicalize(example.graph)),
            std::nullopt});
    }
    messages.push_back(ChatMessage{Role::User, render_event_message(raw_log, context), std::nullopt});
    return messages;
}

std::vector<ChatMessage> build_correction_prompt(const std::vector<ChatMessage>& prior,
                                                 const std::string& failed_output,
                                                 const validation::ValidationReport& report) {
    std::vector<ChatMessage> messages = prior;
    messages.push_back(ChatMessage{Role::Assistant, failed_output, std::nullopt});

    auto violations = report.violations;
    std::sort(violations.begin(), violations.end());
    std::string bullets;
    for (const auto& v : violations) {
        bullets += "- [" + v.code + "] at " + v.location + ": " + v.message + "\n";
    }
    if (!bullets.empty()) bullets.pop_back();
    messages.push_back(
        ChatMessage{Role::User, replace_slot(load_prompt("correction"), "violations", bullets),
                    std::nullopt});
    return messages;
}

std::vector<ChatMessage> build_tactics_prompt(
    const std::vector<kg::KnowledgeGraph>& session_graphs) {
    std::vector<ChatMessage> messages;
    messages.push_back(ChatMessage{Role::System, load_prompt("tactics"), std::nullopt});
    std::string body;
    for (size_t i = 0; i < session_graphs.size(); ++i) {
        if (i > 0) body += "\n\n";
        body += "Knowledge graph " + std::to_string(i + 1) + ":\n" +
                kg::serialize_graph_pretty(kg::canonicalize(session_graphs[i]));
    }
    messages.push_back(ChatMessage{Role::User, body, std::nullopt});
    return messages;
}

std::vector<ChatMessage> build_geval_prompt(const std::string& raw_log,
                                            const kg::KnowledgeGraph& graph) {
    std::vector<ChatMessage> messages;
    messages.push_back(ChatMessage{Role::System, load_prompt("geval"), std::nullopt});
    messages.push_back(ChatMessage{
        Role::User,
        "Log event:\n" + raw_log + "\n\nKnowledge graph:\n" +
            kg::serialize_graph_pretty(kg::canonicalize(graph)),
        std::nullopt});
    return messages;
}

StubBackend::StubBackend(std::string model_id) : model_id_(std::move(model_id)) {}

std::string StubBackend::key_for(const std::string& final_user_message) {
    return util::to_hex(util::fnv1a64(final_user_message));
}

StubBackend StubBackend::from_file(const std::string& path, std::string model_id) {
    StubBackend stub(std::move(model_id));
    nlohmann::json doc = nlohmann::json::parse(util::read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ConfigError("stub fixture file is not valid JSON: " + path);
    if (doc.contains("responses")) {
        for (const auto& [key, value] : doc["responses"].items()) {
            if (value.is_string()) {
                stub.keyed_[key].push_back(value.get<std::string>());
            } else if (value.is_array()) {
                for (const auto& item : value) stub.keyed_[key].push_back(item.get<std::string>());
            }
        }
    }
    if (doc.contains("script")) {
        for (const auto& item : doc["script"]) stub.script_.push_back(item.get<std::string>());
    }
    if (doc.contains("default")) stub.default_response_ = doc["default"].get<std::string>();
    return stub;
}

void StubBackend::add_keyed_response(const std::string& final_user_message,
                                     const std::string& response) {
    keyed_[key_for(final_user_message)].push_back(response);
}

void StubBackend::push_script(const std::string& response) { script_.push_back(response); }

void StubBackend::set_default_response(const std::string& response) {
    default_response_ = response;
}

std::string StubBackend::invoke(const GenerationRequest& request) {
    ++calls_;
    if (script_cursor_ < script_.size()) return script_[script_cursor_++];

    std::string final_user;
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == Role::User) {
            final_user = it->content;
            break;
        }
    }
    const std::string key = key_for(final_user);
    auto it = keyed_.find(key);
    if (it != keyed_.end() && !it->second.empty()) {
        size_t& cursor = keyed_cursor_[key];
        const std::string& response = it->second[std::min(cursor, it->second.size() - 1)];
        ++cursor;
        return response;
    }
    if (default_response_) return *default_response_;
    throw BackendError("stub backend has no response for key " + key);
}

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("remote backend requires an endpoint");
}

nlohmann::json RemoteBackend::request_body(const GenerationRequest& request) const {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& message : request.messages) {
        messages.push_back({{"role", role_name(message.role)}, {"content", message.content}});
    }
    nlohmann::json body{{"model", config_.model_id},
                        {"messages", std::move(messages)},
                        {"temperature", request.temperature}};
    if (!request.output_schema.is_null()) {
        body["tools"] = nlohmann::json::array(
            {{{"type", "function"}, {"function", request.output_schema}}});
        body["tool_choice"] = {
            {"type", "function"},
            {"function", {{"name", request.output_schema.value("name", "knowledge_graph")}}}};
    }
    return body;
}

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string RemoteBackend::invoke(const GenerationRequest& request) {
    auto [base, path] = split_url(config_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const std::string body = request_body(request).dump();

    httplib::Result res;
    for (int attempt = 0; attempt <= config_.retry.count; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(
                config_.retry.backoff_s * static_cast<double>(attempt)));
        }
        res = client.Post(path, headers, body, "application/json");
        if (res && res->status < 500) break;  // retry on transport errors and 5xx only
    }
    if (!res) {
        if (res.error() == httplib::Error::ConnectionTimeout ||
            res.error() == httplib::Error::Read || res.error() == httplib::Error::Write) {
            throw Timeout("backend request timed out: " + config_.endpoint);
        }
        throw BackendError("backend unreachable: " + config_.endpoint);
    }
    if (res->status != 200) {
        throw HTTPError(res->status,
                        "backend returned status " + std::to_string(res->status));
    }
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty()) {
        throw BackendError("backend returned an unusable completion payload");
    }
    const auto& message = doc["choices"][0]["message"];
    if (!request.output_schema.is_null()) {
        if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
            !message["tool_calls"].empty()) {
            const auto& call = message["tool_calls"][0];
            if (call.contains("function") && call["function"].contains("arguments")) {
                const auto& args = call["function"]["arguments"];
                return args.is_string() ? args.get<std::string>() : args.dump();
            }
        }
        throw NoToolCall("model answered without invoking the output tool");
    }
    if (message.contains("content") && message["content"].is_string()) {
        return message["content"].get<std::string>();
    }
    throw BackendError("backend response carried no content");
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    if (config.kind == BackendConfig::Kind::Stub) {
        if (!config.fixtures_path.empty()) {
            return std::make_unique<StubBackend>(
                StubBackend::from_file(config.fixtures_path, config.model_id));
        }
        return std::make_unique<StubBackend>(config.model_id);
    }
    return std::make_unique<RemoteBackend>(config);
}

}  // namespace loggraph::llm
