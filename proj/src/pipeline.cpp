#include "loggraph/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <sstream>
#include <thread>

#include "loggraph/errors.hpp"
#include "loggraph/validation.hpp"

namespace loggraph::pipeline {

namespace {

// Synthetic base for events that arrive without a timestamp (bare text
// lines); offset by position so ordering stays stable.
constexpr util::Micros kSyntheticEpoch = 1640995200LL * 1000000;  // 2022-01-01T00:00:00Z

}  // namespace

std::vector<LogEvent> parse_event_stream(std::istream& in) {
    std::vector<LogEvent> events;
    std::string line;
    size_t index = 0;
    while (std::getline(in, line)) {
        if (util::trim(line).empty()) continue;
        LogEvent event;
        event.received_at = kSyntheticEpoch + static_cast<util::Micros>(index) * 1000000;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            event.raw = line;
        } else {
            event.raw = doc.value("raw", "");
            if (event.raw.empty()) {
                event.raw = line;  // JSON without a "raw" field is itself the event
            } else {
                if (doc.contains("context") && doc["context"].is_string())
                    event.context = doc["context"].get<std::string>();
                if (doc.contains("session_key") && doc["session_key"].is_string())
                    event.session_key = doc["session_key"].get<std::string>();
                if (doc.contains("source_id") && doc["source_id"].is_string())
                    event.source_id = doc["source_id"].get<std::string>();
                if (doc.contains("received_at") && doc["received_at"].is_string()) {
                    if (auto micros = util::parse_datetime(doc["received_at"].get<std::string>())) {
                        event.received_at = *micros;
                    }
                }
            }
        }
        events.push_back(std::move(event));
        ++index;
    }
    return events;
}

std::optional<ModeFlags> mode_from_name(const std::string& name) {
    if (name == "baseline") return ModeFlags{false, false, false};
    if (name == "retrieval") return ModeFlags{true, false, false};
    if (name == "structured") return ModeFlags{false, true, false};
    if (name == "structured-corr") return ModeFlags{false, true, true};
    if (name == "full") return ModeFlags{true, true, true};
    return std::nullopt;
}

std::string session_key_for(const LogEvent& event) {
    if (event.session_key && !event.session_key->empty()) return *event.session_key;
    return "solo-" + util::to_hex(util::fnv1a64(
                         (event.source_id ? *event.source_id : std::string{}) + "\x1f" +
                         std::to_string(event.received_at)));
}

std::vector<Session> group_sessions(const std::vector<LogEvent>& events) {
    std::vector<Session> sessions;
    std::map<std::string, size_t> by_key;
    for (const auto& event : events) {
        std::string key = session_key_for(event);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            by_key.emplace(key, sessions.size());
            sessions.push_back(Session{key, {event}, {}});
        } else {
            sessions[it->second].events.push_back(event);
        }
    }
    for (auto& session : sessions) {
        std::stable_sort(session.events.begin(), session.events.end(),
                         [](const LogEvent& a, const LogEvent& b) {
                             return a.received_at < b.received_at;
                         });
    }
    std::stable_sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
        auto ta = a.events.empty() ? 0 : a.events.front().received_at;
        auto tb = b.events.empty() ? 0 : b.events.front().received_at;
        if (ta != tb) return ta < tb;
        return a.key < b.key;
    });
    return sessions;
}

Pipeline::Pipeline(const ontology::OntologySchema& schema, store::GraphStore& graph_store,
                   retrieval::ExemplarIndex& index, const retrieval::Embedder& embedder,
                   llm::Backend& backend, PipelineConfig config)
    : schema_(schema),
      store_(graph_store),
      index_(index),
      embedder_(embedder),
      backend_(backend),
      config_(std::move(config)) {}

std::vector<llm::Exemplar> Pipeline::retrieve_examples(const LogEvent& event) {
    std::lock_guard<std::mutex> lock(state_mutex_);
    if (index_.empty()) return {};
    ++counters_.index_reads;
    std::string query_text = event.raw;
    if (event.context) query_text += " " + *event.context;
    const auto query = embedder_.embed(query_text);

    const int pool_size = config_.retrieval_params.candidate_pool;
    auto vector_results = index_.vector_search(query, pool_size);
    auto text_results = index_.fulltext_search(query_text, pool_size);
    auto fused = retrieval::fuse(vector_results, text_results);
    if (fused.size() > static_cast<size_t>(pool_size)) fused.resize(static_cast<size_t>(pool_size));
    auto entries = retrieval::mmr_rerank(query, fused, config_.retrieval_params, index_);

    std::vector<llm::Exemplar> examples;
    for (const auto& entry : entries) {
        if (!store_.contains(entry.graph_ref)) continue;
        examples.push_back(llm::Exemplar{entry.log_text, entry.context_text,
                                         store_.fetch_graph(entry.graph_ref).graph});
    }
    return examples;
}

std::string Pipeline::persist(const LogEvent& event, kg::KnowledgeGraph graph, int attempt_count) {
    kg::Provenance prov;
    prov.raw_log = event.raw;
    prov.context = event.context;
    prov.session_key = session_key_for(event);
    prov.generated_at = util::format_datetime(event.received_at);
    prov.model_id = backend_.model_id();
    prov.attempt_count = attempt_count;
    graph.provenance = std::move(prov);

    std::lock_guard<std::mutex> lock(state_mutex_);
    std::string id = store_.persist_graph(graph);
    if (graph.empty()) {
        ++counters_.empty_graphs;
    } else {
        ++counters_.non_empty_graphs;
    }

    // Validated graphs become exemplars for later events; failures and
    // non-retrieval runs are excluded.
    if (!graph.empty() && config_.mode.retrieval_enabled) {
        retrieval::ExemplarEntry entry;
        entry.id = id;
        entry.log_text = event.raw;
        entry.context_text = event.context;
        entry.graph_ref = id;
        std::string text = event.raw;
        if (event.context) text += " " + *event.context;
        entry.embedding = embedder_.embed(text);
        index_.add(std::move(entry));
        ++counters_.index_adds;
    }
    return id;
}

std::string Pipeline::process_event(const LogEvent& event) {
    {
        std::lock_guard<std::mutex> lock(state_mutex_);
        ++counters_.events;
    }

    std::vector<llm::Exemplar> examples;
    if (config_.mode.retrieval_enabled) examples = retrieve_examples(event);

    auto messages = llm::build_generation_prompt(event.raw, event.context, examples, schema_,
                                                 config_.mode.structured_output_enabled);
    nlohmann::json output_schema;
    if (config_.mode.structured_output_enabled) output_schema = llm::output_schema_for(schema_);

    const int max_attempts = config_.mode.correction_enabled ? 1 + config_.max_correction_attempts : 1;
    int attempt = 0;
    while (attempt < max_attempts) {
        ++attempt;
        llm::GenerationRequest request;
        request.messages = messages;
        request.output_schema = output_schema;
        request.temperature = config_.temperature;
        request.max_attempts_remaining = max_attempts - attempt;

        std::string raw_output;
        try {
            {
                std::lock_guard<std::mutex> lock(state_mutex_);
                ++counters_.backend_calls;
                if (attempt > 1) ++counters_.correction_calls;
            }
            raw_output = backend_.invoke(request);
        } catch (const NoToolCall& e) {
            // Syntactic failure: feed it to the correction loop like any
            // malformed payload.
            if (config_.mode.correction_enabled && attempt < max_attempts) {
                messages = llm::build_correction_prompt(messages, "",
                                                        validation::syntactic_failure(e.what()));
                continue;
            }
            std::cerr << "warning: " << e.what() << "; persisting empty graph\n";
            return persist_safely(event, kg::KnowledgeGraph{}, attempt);
        } catch (const BackendError& e) {
            std::cerr << "warning: backend failure (" << e.what() << "); persisting empty graph\n";
            return persist_safely(event, kg::KnowledgeGraph{}, attempt);
        }

        auto parsed = kg::parse_structured_output(raw_output);
        validation::ValidationReport report;
        if (!parsed.ok()) {
            report = validation::syntactic_failure(parsed.error);
        } else {
            report = validation::merge(validation::check_shapes(*parsed.graph, schema_),
                                       validation::check_semantic(*parsed.graph));
        }
        if (report.clean()) {
            return persist_safely(event, std::move(*parsed.graph), attempt);
        }
        if (config_.mode.correction_enabled && attempt < max_attempts) {
            messages = llm::build_correction_prompt(messages, raw_output, report);
            continue;
        }
        break;  // violations remain and no correction budget left
    }
    return persist_safely(event, kg::KnowledgeGraph{}, attempt);
}

std::string Pipeline::persist_safely(const LogEvent& event, kg::KnowledgeGraph graph,
                                     int attempt_count) {
    const bool was_empty = graph.empty();
    try {
        return persist(event, std::move(graph), attempt_count);
    } catch (const StorageError& e) {
        std::cerr << "warning: store failure (" << e.what() << ")";
        if (!was_empty) {
            std::cerr << "; persisting empty graph\n";
            try {
                return persist(event, kg::KnowledgeGraph{}, attempt_count);
            } catch (const StorageError&) {
            }
        }
        std::cerr << "; event dropped\n";
        return "";
    }
}

void process_sessions(Pipeline& pipe, std::vector<Session>& sessions, int workers) {
    if (workers <= 1 || sessions.size() <= 1) {
        for (auto& session : sessions) {
            for (const auto& event : session.events) {
                session.graph_ids.push_back(pipe.process_event(event));
            }
        }
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= sessions.size()) return;
            for (const auto& event : sessions[i].events) {
                sessions[i].graph_ids.push_back(pipe.process_event(event));
            }
        }
    };
    std::vector<std::thread> threads;
    const size_t n = std::min<size_t>(static_cast<size_t>(workers), sessions.size());
    threads.reserve(n);
    for (size_t i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
}

TacticsPrediction Pipeline::predict_tactics(const Session& session,
                                            const std::vector<std::string>& vocabulary) {
    TacticsPrediction prediction;
    prediction.session_key = session.key;

    std::vector<kg::KnowledgeGraph> graphs;
    for (const auto& id : session.graph_ids) {
        if (!store_.contains(id)) continue;
        const auto& stored = store_.fetch_graph(id);
        if (!stored.graph.empty()) graphs.push_back(stored.graph);
    }
    if (graphs.empty()) return prediction;

    llm::GenerationRequest request;
    request.messages = llm::build_tactics_prompt(graphs);
    request.temperature = config_.temperature;
    try {
        {
            std::lock_guard<std::mutex> lock(state_mutex_);
            ++counters_.backend_calls;
        }
        prediction.raw_response = backend_.invoke(request);
    } catch (const BackendError& e) {
        std::cerr << "warning: tactics backend failure for session " << session.key << " ("
                  << e.what() << ")\n";
        prediction.backend_failed = true;
        return prediction;
    }
    std::vector<std::string> dropped;
    prediction.tactics = parse_tactics_response(prediction.raw_response, vocabulary, &dropped);
    for (const auto& name : dropped) {
        std::cerr << "warning: dropping unknown tactic \"" << name << "\" for session "
                  << session.key << "\n";
    }
    return prediction;
}

std::set<std::string> parse_tactics_response(const std::string& response,
                                             const std::vector<std::string>& vocabulary,
                                             std::vector<std::string>* dropped) {
    std::vector<std::string> names;
    nlohmann::json doc = nlohmann::json::parse(response, nullptr, false);
    if (!doc.is_discarded() && doc.is_array()) {
        for (const auto& item : doc) {
            if (item.is_string()) names.push_back(item.get<std::string>());
        }
    } else {
        // Loose fallback: comma- or newline-separated names, bullets allowed.
        std::string current;
        for (char c : response + ",") {
            if (c == ',' || c == '\n') {
                std::string name = util::trim(current);
                while (!name.empty() && (name.front() == '-' || name.front() == '*')) {
                    name = util::trim(name.substr(1));
                }
                if (!name.empty()) names.push_back(name);
                current.clear();
            } else {
                current.push_back(c);
            }
        }
    }

    std::set<std::string> out;
    for (const auto& name : names) {
        const std::string lowered = util::to_lower(util::trim(name));
        bool found = false;
        for (const auto& canonical : vocabulary) {
            if (util::to_lower(canonical) == lowered) {
                out.insert(canonical);
                found = true;
                break;
            }
        }
        if (!found && dropped) dropped->push_back(name);
    }
    return out;
}

std::vector<std::string> load_tactics_vocabulary(const std::string& path) {
    std::istringstream in(util::read_file(path));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string name = util::trim(line);
        if (!name.empty()) out.push_back(name);
    }
    return out;
}

std::vector<std::string> default_tactics_vocabulary() {
    return load_tactics_vocabulary(llm::data_dir() + "/tactics.txt");
}

}  // namespace loggraph::pipeline
