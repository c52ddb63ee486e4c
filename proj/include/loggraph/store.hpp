#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loggraph/kg.hpp"
#include "loggraph/ontology.hpp"

namespace loggraph::store {

struct StoredGraph {
    std::string id;  // content hash of canonical graph + originating raw log
    kg::KnowledgeGraph graph;
    std::string created_at;

    bool operator==(const StoredGraph&) const = default;
};

// Embedded single-file store: graphs.jsonl append log plus an in-memory map.
// Single writer, shared readers (writer serialization is the pipeline's job).
class GraphStore {
public:
    // In-memory store; nothing touches disk.
    GraphStore() = default;

    // Binds to <dir>/graphs.jsonl, replaying any existing log.
    // Throws StorageError when the directory cannot be used.
    static GraphStore open(const std::string& dir);

    // Canonicalizes, derives the content id, and appends. Re-persisting
    // identical content returns the existing id without a new record.
    std::string persist_graph(const kg::KnowledgeGraph& graph);

    // Throws NotFound for unknown ids.
    const StoredGraph& fetch_graph(const std::string& id) const;

    bool contains(const std::string& id) const { return by_id_.count(id) > 0; }
    size_t size() const { return order_.size(); }

    // Ids in insertion order.
    const std::vector<std::string>& ids() const { return order_; }

    // Graph ids for one session key, ordered by created_at.
    std::vector<std::string> list_by_session(const std::string& session_key) const;

    // All session keys present, sorted.
    std::vector<std::string> session_keys() const;

    // One canonical graph per line, sorted by id.
    void export_jsonl(const std::string& path) const;

    // RDF rendering using the descriptor's namespace, one resource per node,
    // external alignments as additional type triples. Sorted by graph id.
    void export_turtle(const std::string& path, const ontology::OntologySchema& schema) const;
    std::string to_turtle(const ontology::OntologySchema& schema) const;

    static std::string content_id(const kg::KnowledgeGraph& canonical_graph);

private:
    std::map<std::string, StoredGraph> by_id_;
    std::vector<std::string> order_;
    std::string log_path_;  // empty for in-memory stores

    void append_record(const StoredGraph& record);
};

}  // namespace loggraph::store
