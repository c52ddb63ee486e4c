#include "loggraph/kg.hpp"

#include <algorithm>

#include "loggraph/util.hpp"

namespace loggraph::kg {

Value normalize_value(const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) {
        std::string t = util::trim(*s);
        if (auto micros = util::parse_datetime(t)) return util::format_datetime(*micros);
        return t;
    }
    return v;
}

std::string tagged_literal(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) {
                return x ? "b:true" : "b:false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                return "i:" + std::to_string(x);
            } else if constexpr (std::is_same_v<T, double>) {
                return "f:" + nlohmann::json(x).dump();
            } else {
                return "s:" + x;
            }
        },
        v);
}

nlohmann::json value_to_json(const Value& v) {
    return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

bool value_from_json(const nlohmann::json& j, Value& out) {
    switch (j.type()) {
        case nlohmann::json::value_t::boolean:
            out = j.get<bool>();
            return true;
        case nlohmann::json::value_t::number_integer:
        case nlohmann::json::value_t::number_unsigned:
            out = j.get<std::int64_t>();
            return true;
        case nlohmann::json::value_t::number_float:
            out = j.get<double>();
            return true;
        case nlohmann::json::value_t::string:
            out = j.get<std::string>();
            return true;
        default:
            return false;
    }
}

const KGNode* KnowledgeGraph::find_node(const std::string& id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

std::string canonical_key(const KGNode& node) {
    nlohmann::json props = nlohmann::json::object();
    for (const auto& [name, value] : node.properties) {
        props[name] = tagged_literal(normalize_value(value));
    }
    return nlohmann::json::array({node.node_type, std::move(props)}).dump();
}

namespace {

// Keys for endpoints that do not resolve to a node stay deterministic so that
// to_triples is total even on graphs that fail semantic validation.
std::string endpoint_key(const KnowledgeGraph& g, std::map<std::string, std::string>& cache,
                         const std::string& id) {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    const KGNode* node = g.find_node(id);
    std::string key = node ? canonical_key(*node) : "~missing:" + id;
    cache.emplace(id, key);
    return key;
}

}  // namespace

std::set<Triple> to_triples(const KnowledgeGraph& g) {
    std::set<Triple> out;
    std::map<std::string, std::string> cache;
    for (const auto& node : g.nodes) {
        const std::string key = canonical_key(node);
        cache.emplace(node.id, key);
        for (const auto& [name, value] : node.properties) {
            out.insert(Triple{key, name, tagged_literal(normalize_value(value)), false});
        }
    }
    for (const auto& rel : g.relationships) {
        out.insert(Triple{endpoint_key(g, cache, rel.source_id), rel.rel_type,
                          endpoint_key(g, cache, rel.target_id), true});
    }
    return out;
}

KnowledgeGraph canonicalize(const KnowledgeGraph& g) {
    KnowledgeGraph out = g;
    for (auto& node : out.nodes) {
        std::map<std::string, Value> normalized;
        for (const auto& [name, value] : node.properties) normalized[name] = normalize_value(value);
        node.properties = std::move(normalized);
    }
    std::stable_sort(out.nodes.begin(), out.nodes.end(), [](const KGNode& a, const KGNode& b) {
        auto ka = std::tuple(a.node_type, canonical_key(a), a.id);
        auto kb = std::tuple(b.node_type, canonical_key(b), b.id);
        return ka < kb;
    });
    std::sort(out.relationships.begin(), out.relationships.end());
    return out;
}

namespace {

ParseResult fail(std::string reason) { return ParseResult{std::nullopt, std::move(reason)}; }

bool parse_nodes(const nlohmann::json& arr, KnowledgeGraph& g, std::string& error) {
    std::set<std::string> seen_ids;
    for (const auto& nj : arr) {
        if (!nj.is_object()) {
            error = "every entry of \"nodes\" must be an object";
            return false;
        }
        for (const auto& [key, _] : nj.items()) {
            if (key != "id" && key != "type" && key != "properties") {
                error = "unknown key \"" + key + "\" in node object";
                return false;
            }
        }
        if (!nj.contains("id") || !nj["id"].is_string() || nj["id"].get<std::string>().empty()) {
            error = "node requires a non-empty string \"id\"";
            return false;
        }
        if (!nj.contains("type") || !nj["type"].is_string()) {
            error = "node requires a string \"type\"";
            return false;
        }
        KGNode node;
        node.id = nj["id"].get<std::string>();
        node.node_type = nj["type"].get<std::string>();
        if (!seen_ids.insert(node.id).second) {
            error = "duplicate node id \"" + node.id + "\"";
            return false;
        }
        if (nj.contains("properties")) {
            if (!nj["properties"].is_object()) {
                error = "node \"properties\" must be an object";
                return false;
            }
            for (const auto& [name, vj] : nj["properties"].items()) {
                Value value;
                if (!value_from_json(vj, value)) {
                    error = "property \"" + name + "\" of node \"" + node.id +
                            "\" must be a scalar value";
                    return false;
                }
                node.properties.emplace(name, std::move(value));
            }
        }
        g.nodes.push_back(std::move(node));
    }
    return true;
}

bool parse_relationships(const nlohmann::json& arr, KnowledgeGraph& g, std::string& error) {
    for (const auto& rj : arr) {
        if (!rj.is_object()) {
            error = "every entry of \"relationships\" must be an object";
            return false;
        }
        for (const auto& [key, _] : rj.items()) {
            if (key != "source" && key != "target" && key != "type") {
                error = "unknown key \"" + key + "\" in relationship object";
                return false;
            }
        }
        for (const char* key : {"source", "target", "type"}) {
            if (!rj.contains(key) || !rj[key].is_string()) {
                error = std::string("relationship requires a string \"") + key + "\"";
                return false;
            }
        }
        g.relationships.push_back(KGRelationship{rj["source"].get<std::string>(),
                                                 rj["target"].get<std::string>(),
                                                 rj["type"].get<std::string>()});
    }
    return true;
}

ParseResult parse_graph_object(const nlohmann::json& doc, bool allow_provenance) {
    if (!doc.is_object()) return fail("output must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key == "nodes" || key == "relationships") continue;
        if (allow_provenance && key == "provenance") continue;
        return fail("unknown top-level key \"" + key + "\"");
    }
    if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
        return fail("missing \"nodes\" array");
    }
    if (!doc.contains("relationships") || !doc["relationships"].is_array()) {
        return fail("missing \"relationships\" array");
    }
    KnowledgeGraph g;
    std::string error;
    if (!parse_nodes(doc["nodes"], g, error)) return fail(std::move(error));
    if (!parse_relationships(doc["relationships"], g, error)) return fail(std::move(error));
    if (allow_provenance && doc.contains("provenance")) {
        const auto& pj = doc["provenance"];
        if (!pj.is_object()) return fail("\"provenance\" must be an object");
        Provenance prov;
        if (pj.contains("raw_log") && pj["raw_log"].is_string())
            prov.raw_log = pj["raw_log"].get<std::string>();
        if (pj.contains("context") && pj["context"].is_string())
            prov.context = pj["context"].get<std::string>();
        if (pj.contains("session_key") && pj["session_key"].is_string())
            prov.session_key = pj["session_key"].get<std::string>();
        if (pj.contains("generated_at") && pj["generated_at"].is_string())
            prov.generated_at = pj["generated_at"].get<std::string>();
        if (pj.contains("model_id") && pj["model_id"].is_string())
            prov.model_id = pj["model_id"].get<std::string>();
        if (pj.contains("attempt_count") && pj["attempt_count"].is_number_integer())
            prov.attempt_count = pj["attempt_count"].get<int>();
        g.provenance = std::move(prov);
    }
    return ParseResult{std::move(g), ""};
}

}  // namespace

ParseResult parse_structured_output(const std::string& raw) {
    nlohmann::json doc = nlohmann::json::parse(raw, nullptr, false);
    if (doc.is_discarded()) return fail("output is not parsable JSON (unbalanced or malformed document)");
    return parse_graph_object(doc, /*allow_provenance=*/false);
}

nlohmann::json graph_to_json(const KnowledgeGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : g.nodes) {
        nlohmann::json props = nlohmann::json::object();
        for (const auto& [name, value] : node.properties) props[name] = value_to_json(value);
        nodes.push_back(nlohmann::json{{"id", node.id}, {"type", node.node_type},
                                       {"properties", std::move(props)}});
    }
    nlohmann::json rels = nlohmann::json::array();
    for (const auto& rel : g.relationships) {
        rels.push_back(nlohmann::json{{"source", rel.source_id}, {"target", rel.target_id},
                                      {"type", rel.rel_type}});
    }
    nlohmann::json out{{"nodes", std::move(nodes)}, {"relationships", std::move(rels)}};
    if (g.provenance) {
        const auto& p = *g.provenance;
        nlohmann::json pj{{"raw_log", p.raw_log},
                          {"generated_at", p.generated_at},
                          {"model_id", p.model_id},
                          {"attempt_count", p.attempt_count}};
        if (p.context) pj["context"] = *p.context;
        if (p.session_key) pj["session_key"] = *p.session_key;
        out["provenance"] = std::move(pj);
    }
    return out;
}

std::string serialize_graph(const KnowledgeGraph& g) { return graph_to_json(g).dump(); }

std::string serialize_graph_pretty(const KnowledgeGraph& g) { return graph_to_json(g).dump(2); }

ParseResult graph_from_json(const nlohmann::json& j) {
    return parse_graph_object(j, /*allow_provenance=*/true);
}

ParseResult parse_graph_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) return fail("graph document is not parsable JSON");
    return graph_from_json(doc);
}

}  // namespace loggraph::kg
