#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loggraph/kg.hpp"
#include "loggraph/llm.hpp"
#include "loggraph/ontology.hpp"
#include "loggraph/retrieval.hpp"
#include "loggraph/store.hpp"
#include "loggraph/util.hpp"

namespace loggraph::pipeline {

struct LogEvent {
    std::string raw;
    std::optional<std::string> context;
    std::optional<std::string> session_key;
    util::Micros received_at = 0;
    std::optional<std::string> source_id;
};

// One JSON object per line ({raw, context?, session_key?, received_at?,
// source_id?}); bare lines become raw-only events with synthetic timestamps.
std::vector<LogEvent> parse_event_stream(std::istream& in);

struct ModeFlags {
    bool retrieval_enabled = true;
    bool structured_output_enabled = true;
    bool correction_enabled = true;
};

// The ablation configurations: baseline, retrieval, structured,
// structured-corr, full.
std::optional<ModeFlags> mode_from_name(const std::string& name);

struct PipelineConfig {
    int max_correction_attempts = 3;
    retrieval::MMRParams retrieval_params;
    ModeFlags mode;
    double temperature = 0.7;
    int workers = 1;
};

struct Session {
    std::string key;
    std::vector<LogEvent> events;        // time-ordered
    std::vector<std::string> graph_ids;  // stored-graph ids
};

struct TacticsPrediction {
    std::string session_key;
    std::set<std::string> tactics;
    std::string raw_response;
    bool backend_failed = false;
};

struct Counters {
    std::uint64_t events = 0;
    std::uint64_t backend_calls = 0;
    std::uint64_t correction_calls = 0;
    std::uint64_t index_reads = 0;
    std::uint64_t index_adds = 0;
    std::uint64_t empty_graphs = 0;
    std::uint64_t non_empty_graphs = 0;
};

// The event's own key, or the fallback singleton key derived from
// (source_id, received_at) when none was supplied.
std::string session_key_for(const LogEvent& event);

// Group by session key; events lacking one fall into singleton sessions keyed
// by session_key_for. Sessions ordered by first event time, events within a
// session by received_at (stable).
std::vector<Session> group_sessions(const std::vector<LogEvent>& events);

class Pipeline {
public:
    Pipeline(const ontology::OntologySchema& schema, store::GraphStore& graph_store,
             retrieval::ExemplarIndex& index, const retrieval::Embedder& embedder,
             llm::Backend& backend, PipelineConfig config);

    // Runs retrieve -> generate -> validate/correct -> persist for one event
    // and returns the stored-graph id (the empty graph on terminal failure).
    // Never throws for per-event backend failures.
    std::string process_event(const LogEvent& event);

    // Tactics prediction over the session's stored graphs. Unknown tactic
    // names are dropped against the vocabulary; backend failures yield an
    // empty prediction flagged as failed.
    TacticsPrediction predict_tactics(const Session& session,
                                      const std::vector<std::string>& vocabulary);

    const Counters& counters() const { return counters_; }

private:
    const ontology::OntologySchema& schema_;
    store::GraphStore& store_;
    retrieval::ExemplarIndex& index_;
    const retrieval::Embedder& embedder_;
    llm::Backend& backend_;
    PipelineConfig config_;
    Counters counters_;
    // Guards store, index, and counters; distinct sessions may run on
    // parallel workers while backend calls stay outside the lock.
    std::mutex state_mutex_;

    std::vector<llm::Exemplar> retrieve_examples(const LogEvent& event);
    std::string persist(const LogEvent& event, kg::KnowledgeGraph graph, int attempt_count);
    std::string persist_safely(const LogEvent& event, kg::KnowledgeGraph graph, int attempt_count);
};

// Runs whole sessions across `workers` threads (events within a session stay
// sequential). With one worker this is a plain deterministic loop.
void process_sessions(Pipeline& pipe, std::vector<Session>& sessions, int workers);

// Parses a model tactics answer: a JSON array of strings when possible,
// otherwise comma/newline-separated names. Filters against the vocabulary
// case-insensitively; unknown names are dropped (reported via `dropped`).
std::set<std::string> parse_tactics_response(const std::string& response,
                                             const std::vector<std::string>& vocabulary,
                                             std::vector<std::string>* dropped = nullptr);

std::vector<std::string> load_tactics_vocabulary(const std::string& path);
std::vector<std::string> default_tactics_vocabulary();

}  // namespace loggraph::pipeline
