#include "loggraph/store.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "loggraph/errors.hpp"
#include "loggraph/util.hpp"

namespace loggraph::store {

namespace fs = std::filesystem;

GraphStore GraphStore::open(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw StorageError("cannot create store directory: " + dir);
    GraphStore store;
    store.log_path_ = (fs::path(dir) / "graphs.jsonl").string();
    if (fs::exists(store.log_path_)) {
        std::ifstream in(store.log_path_);
        if (!in) throw StorageError("cannot open " + store.log_path_);
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
            if (record.is_discarded() || !record.contains("id") || !record.contains("graph")) {
                throw StorageError("corrupt store record at " + store.log_path_ + ":" +
                                   std::to_string(line_no));
            }
            auto parsed = kg::graph_from_json(record["graph"]);
            if (!parsed.ok()) {
                throw StorageError("corrupt graph at " + store.log_path_ + ":" +
                                   std::to_string(line_no) + ": " + parsed.error);
            }
            StoredGraph stored;
            stored.id = record["id"].get<std::string>();
            stored.graph = std::move(*parsed.graph);
            stored.created_at = record.value("created_at", "");
            store.order_.push_back(stored.id);
            store.by_id_.emplace(stored.id, std::move(stored));
        }
    }
    return store;
}

std::string GraphStore::content_id(const kg::KnowledgeGraph& canonical_graph) {
    kg::KnowledgeGraph bare = canonical_graph;
    std::string raw_log = bare.provenance ? bare.provenance->raw_log : "";
    bare.provenance.reset();
    return util::sha256_hex(kg::serialize_graph(bare) + '\n' + raw_log);
}

std::string GraphStore::persist_graph(const kg::KnowledgeGraph& graph) {
    StoredGraph record;
    record.graph = kg::canonicalize(graph);
    record.id = content_id(record.graph);
    record.created_at =
        record.graph.provenance ? record.graph.provenance->generated_at : std::string{};
    auto it = by_id_.find(record.id);
    if (it != by_id_.end()) return record.id;
    append_record(record);
    order_.push_back(record.id);
    by_id_.emplace(record.id, std::move(record));
    return order_.back();
}

void GraphStore::append_record(const StoredGraph& record) {
    if (log_path_.empty()) return;
    std::ofstream out(log_path_, std::ios::app);
    if (!out) throw StorageError("cannot append to " + log_path_);
    nlohmann::json line{{"created_at", record.created_at},
                        {"graph", kg::graph_to_json(record.graph)},
                        {"id", record.id}};
    out << line.dump() << "\n";
    if (!out) throw StorageError("write failed for " + log_path_);
}

const StoredGraph& GraphStore::fetch_graph(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw NotFound("no stored graph with id " + id);
    return it->second;
}

std::vector<std::string> GraphStore::list_by_session(const std::string& session_key) const {
    std::vector<const StoredGraph*> matches;
    for (const auto& id : order_) {
        const auto& stored = by_id_.at(id);
        if (stored.graph.provenance && stored.graph.provenance->session_key &&
            *stored.graph.provenance->session_key == session_key) {
            matches.push_back(&stored);
        }
    }
    std::stable_sort(matches.begin(), matches.end(),
                     [](const StoredGraph* a, const StoredGraph* b) {
                         return a->created_at < b->created_at;
                     });
    std::vector<std::string> out;
    for (const auto* m : matches) out.push_back(m->id);
    return out;
}

std::vector<std::string> GraphStore::session_keys() const {
    std::vector<std::string> keys;
    for (const auto& [id, stored] : by_id_) {
        if (stored.graph.provenance && stored.graph.provenance->session_key) {
            const auto& key = *stored.graph.provenance->session_key;
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        }
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

void GraphStore::export_jsonl(const std::string& path) const {
    std::ostringstream out;
    std::vector<std::string> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& id : sorted) {
        out << kg::serialize_graph(by_id_.at(id).graph) << "\n";
    }
    util::write_file_atomic(path, out.str());
}

namespace {

std::string turtle_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string local_name(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            out.push_back(c);
        } else {
            out.push_back('_');
        }
    }
    return out;
}

std::string literal_for(const kg::Value& v, ontology::Datatype dt) {
    using ontology::Datatype;
    switch (dt) {
        case Datatype::Integer:
            if (const auto* i = std::get_if<std::int64_t>(&v)) {
                return "\"" + std::to_string(*i) + "\"^^xsd:integer";
            }
            break;
        case Datatype::Float:
            if (const auto* d = std::get_if<double>(&v)) {
                return "\"" + nlohmann::json(*d).dump() + "\"^^xsd:double";
            }
            if (const auto* i = std::get_if<std::int64_t>(&v)) {
                return "\"" + std::to_string(*i) + "\"^^xsd:double";
            }
            break;
        case Datatype::Boolean:
            if (const auto* b = std::get_if<bool>(&v)) {
                return std::string(*b ? "\"true\"" : "\"false\"") + "^^xsd:boolean";
            }
            break;
        case Datatype::DateTime:
            if (const auto* s = std::get_if<std::string>(&v)) {
                if (auto micros = util::parse_datetime(*s)) {
                    return "\"" + util::format_datetime(*micros) + "\"^^xsd:dateTime";
                }
            }
            break;
        case Datatype::String:
            break;
    }
    if (const auto* s = std::get_if<std::string>(&v)) return "\"" + turtle_escape(*s) + "\"";
    return "\"" + turtle_escape(nlohmann::json(kg::value_to_json(v)).dump()) + "\"";
}

}  // namespace

std::string GraphStore::to_turtle(const ontology::OntologySchema& schema) const {
    const std::string prefix = schema.namespace_prefix();

    bool uses_prov = false;
    bool uses_time = false;
    for (const auto& [name, def] : schema.classes()) {
        if (!def.external_alignment) continue;
        if (def.external_alignment->rfind("prov:", 0) == 0) uses_prov = true;
        if (def.external_alignment->rfind("time:", 0) == 0) uses_time = true;
    }

    std::ostringstream out;
    out << "@prefix " << prefix << ": <" << schema.namespace_iri() << "> .\n";
    out << "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n";
    if (uses_prov) out << "@prefix prov: <http://www.w3.org/ns/prov#> .\n";
    if (uses_time) out << "@prefix time: <http://www.w3.org/2006/time#> .\n";

    std::vector<std::string> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& id : sorted) {
        const auto& stored = by_id_.at(id);
        if (stored.graph.empty()) continue;
        out << "\n";
        const std::string graph_tag = id.substr(0, 12);
        for (const auto& node : stored.graph.nodes) {
            const std::string subject =
                prefix + ":g" + graph_tag + "_" + local_name(node.id);
            out << subject << " a " << prefix << ":" << node.node_type;
            const ontology::ClassDef* cls = schema.find_class(node.node_type);
            if (cls && cls->external_alignment) out << ", " << *cls->external_alignment;
            for (const auto& [pname, value] : node.properties) {
                ontology::Datatype dt = ontology::Datatype::String;
                if (cls) {
                    const auto& flat = schema.flattened_properties(node.node_type);
                    if (auto it = flat.find(pname); it != flat.end()) dt = it->second.datatype;
                }
                out << " ;\n    " << prefix << ":" << pname << " " << literal_for(value, dt);
            }
            for (const auto& rel : stored.graph.relationships) {
                if (rel.source_id != node.id) continue;
                out << " ;\n    " << prefix << ":" << rel.rel_type << " " << prefix << ":g"
                    << graph_tag << "_" << local_name(rel.target_id);
            }
            out << " .\n";
        }
    }
    return out.str();
}

void GraphStore::export_turtle(const std::string& path,
                               const ontology::OntologySchema& schema) const {
    util::write_file_atomic(path, to_turtle(schema));
}

}  // namespace loggraph::store
