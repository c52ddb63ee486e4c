#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace loggraph::kg {

// Property values are scalars only; nested structures are a parse error.
using Value = std::variant<bool, std::int64_t, double, std::string>;

// Type-aware normalization: strings are trimmed, and strings that parse as
// datetimes are rewritten to the canonical UTC form. Log timestamps show up
// in many formats; matching against gold graphs needs a single spelling.
Value normalize_value(const Value& v);

// Unambiguous single-string rendering, tagged by type ("s:", "i:", "f:", "b:").
std::string tagged_literal(const Value& v);

nlohmann::json value_to_json(const Value& v);
bool value_from_json(const nlohmann::json& j, Value& out);

struct KGNode {
    std::string id;
    std::string node_type;
    std::map<std::string, Value> properties;

    bool operator==(const KGNode&) const = default;
};

struct KGRelationship {
    std::string source_id;
    std::string target_id;
    std::string rel_type;

    bool operator==(const KGRelationship&) const = default;
    auto operator<=>(const KGRelationship&) const = default;
};

struct Provenance {
    std::string raw_log;
    std::optional<std::string> context;
    std::optional<std::string> session_key;
    std::string generated_at;  // canonical datetime text
    std::string model_id;
    int attempt_count = 0;

    bool operator==(const Provenance&) const = default;
};

struct KnowledgeGraph {
    std::vector<KGNode> nodes;
    std::vector<KGRelationship> relationships;
    std::optional<Provenance> provenance;

    // An empty graph is the legal "generation failed" value.
    bool empty() const { return nodes.empty() && relationships.empty(); }

    const KGNode* find_node(const std::string& id) const;

    bool operator==(const KnowledgeGraph&) const = default;
};

// Id-independent canonical entity key: (node type, sorted normalized property
// multiset). Isomorphic graphs produce equal keys regardless of node ids.
std::string canonical_key(const KGNode& node);

struct Triple {
    std::string subject;    // canonical entity key
    std::string predicate;  // relationship or property name
    std::string object;     // canonical entity key or tagged literal
    bool object_is_entity = false;

    auto operator<=>(const Triple&) const = default;
};

// One triple per relationship plus one per node property. Duplicate canonical
// keys collapse since the result is a set.
std::set<Triple> to_triples(const KnowledgeGraph& g);

// Nodes sorted by (type, canonical key, id), relationships sorted
// lexicographically. Idempotent; ids are preserved.
KnowledgeGraph canonicalize(const KnowledgeGraph& g);

struct ParseResult {
    std::optional<KnowledgeGraph> graph;
    std::string error;  // set iff !graph; fed verbatim into correction prompts

    bool ok() const { return graph.has_value(); }
};

// Strict parse of the structured-output payload: the document must be a JSON
// object with exactly the "nodes" and "relationships" arrays, scalar property
// values, and unique node ids. Dangling relationship endpoints parse fine;
// they are a semantic violation, not a syntactic one.
ParseResult parse_structured_output(const std::string& raw);

// Storage/wire form: the structured-output schema plus "provenance".
nlohmann::json graph_to_json(const KnowledgeGraph& g);
std::string serialize_graph(const KnowledgeGraph& g);          // compact, canonical key order
std::string serialize_graph_pretty(const KnowledgeGraph& g);   // 2-space indent, for prompts
ParseResult graph_from_json(const nlohmann::json& j);
ParseResult parse_graph_text(const std::string& text);

}  // namespace loggraph::kg
