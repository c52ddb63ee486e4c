#include "loggraph/validation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "loggraph/errors.hpp"
#include "loggraph/util.hpp"

namespace loggraph::validation {

namespace {

constexpr const char* kEventClass = "Event";

bool datatype_matches(ontology::Datatype dt, const kg::Value& v) {
    using ontology::Datatype;
    switch (dt) {
        case Datatype::String:
            return std::holds_alternative<std::string>(v);
        case Datatype::Integer:
            return std::holds_alternative<std::int64_t>(v);
        case Datatype::Float:
            return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
        case Datatype::Boolean:
            return std::holds_alternative<bool>(v);
        case Datatype::DateTime:
            if (const auto* s = std::get_if<std::string>(&v)) {
                return util::parse_datetime(*s).has_value();
            }
            return false;
    }
    return false;
}

void add(ValidationReport& report, Stage stage, std::string code, std::string location,
         std::string message) {
    report.violations.push_back(
        Violation{stage, std::move(code), std::move(location), std::move(message)});
}

}  // namespace

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Syntactic: return "syntactic";
        case Stage::Shape: return "shape";
        case Stage::Semantic: return "semantic";
    }
    return "syntactic";
}

ValidationReport syntactic_failure(const std::string& reason) {
    ValidationReport report;
    add(report, Stage::Syntactic, "syntactic/malformed", "graph", reason);
    return report;
}

ValidationReport check_shapes(const kg::KnowledgeGraph& g, const ontology::OntologySchema& s) {
    ValidationReport report;

    std::map<std::string, const kg::KGNode*> nodes_by_id;
    for (const auto& node : g.nodes) nodes_by_id.emplace(node.id, &node);

    for (const auto& node : g.nodes) {
        report.checked_constraints += 1;  // node type validity
        const ontology::ClassDef* cls = s.find_class(node.node_type);
        if (!cls) {
            add(report, Stage::Shape, "shape/unknown-type", node.id,
                "node \"" + node.id + "\" has unknown type \"" + node.node_type + "\"");
            continue;  // property checks need a known class
        }
        if (cls->abstract) {
            add(report, Stage::Shape, "shape/abstract-type", node.id,
                "node \"" + node.id + "\" instantiates abstract type \"" + node.node_type + "\"");
        }
        const auto& allowed = s.flattened_properties(node.node_type);
        for (const auto& [name, value] : node.properties) {
            report.checked_constraints += 1;  // property vocabulary + datatype
            auto it = allowed.find(name);
            if (it == allowed.end()) {
                add(report, Stage::Shape, "shape/unknown-property", node.id,
                    "property \"" + name + "\" is not declared for type \"" + node.node_type +
                        "\" or its ancestors");
                continue;
            }
            if (!datatype_matches(it->second.datatype, value)) {
                add(report, Stage::Shape, "shape/datatype", node.id,
                    "property \"" + name + "\" of node \"" + node.id + "\" must be of datatype " +
                        ontology::datatype_name(it->second.datatype));
            }
        }
        for (const auto& [name, def] : allowed) {
            if (!def.required) continue;
            report.checked_constraints += 1;  // required-property presence
            if (!node.properties.count(name)) {
                add(report, Stage::Shape, "shape/missing-required", node.id,
                    "node \"" + node.id + "\" of type \"" + node.node_type +
                        "\" is missing required property \"" + name + "\"");
            }
        }
    }

    for (size_t i = 0; i < g.relationships.size(); ++i) {
        const auto& rel = g.relationships[i];
        const std::string location = "relationship[" + std::to_string(i) + "]";
        report.checked_constraints += 1;  // relationship vocabulary
        std::vector<const ontology::RelationshipDef*> defs;
        for (const auto& def : s.relationships()) {
            if (def.name == rel.rel_type) defs.push_back(&def);
        }
        if (defs.empty()) {
            add(report, Stage::Shape, "shape/unknown-relationship", location,
                "relationship type \"" + rel.rel_type + "\" is not defined in the ontology");
            continue;
        }
        auto src_it = nodes_by_id.find(rel.source_id);
        auto tgt_it = nodes_by_id.find(rel.target_id);
        // Dangling endpoints are a semantic violation; endpoint classes can
        // only be checked when both nodes exist and carry known types.
        if (src_it == nodes_by_id.end() || tgt_it == nodes_by_id.end()) continue;
        const std::string& src_type = src_it->second->node_type;
        const std::string& tgt_type = tgt_it->second->node_type;
        if (!s.has_class(src_type) || !s.has_class(tgt_type)) continue;
        report.checked_constraints += 1;  // endpoint compatibility
        bool compatible = std::any_of(defs.begin(), defs.end(), [&](const auto* def) {
            return s.is_subclass_of(src_type, def->source_class) &&
                   s.is_subclass_of(tgt_type, def->target_class);
        });
        if (!compatible) {
            const auto* def = defs.front();
            add(report, Stage::Shape, "shape/endpoint-type", location,
                "relationship \"" + rel.rel_type + "\" requires source \"" + def->source_class +
                    "\" and target \"" + def->target_class + "\" but connects \"" + src_type +
                    "\" to \"" + tgt_type + "\"");
        }
    }

    // Relationship cardinality, evaluated per node whose class is compatible
    // with a definition's source class.
    for (const auto& node : g.nodes) {
        if (!s.has_class(node.node_type)) continue;
        for (const auto& def : s.relationships()) {
            if (!s.is_subclass_of(node.node_type, def.source_class)) continue;
            report.checked_constraints += 1;
            int count = 0;
            for (const auto& rel : g.relationships) {
                if (rel.source_id == node.id && rel.rel_type == def.name) ++count;
            }
            if (count < def.min_cardinality) {
                add(report, Stage::Shape, "shape/cardinality", node.id,
                    "node \"" + node.id + "\" has " + std::to_string(count) + " \"" + def.name +
                        "\" relationships but at least " + std::to_string(def.min_cardinality) +
                        " required");
            } else if (def.max_cardinality && count > *def.max_cardinality) {
                add(report, Stage::Shape, "shape/cardinality", node.id,
                    "node \"" + node.id + "\" has " + std::to_string(count) + " \"" + def.name +
                        "\" relationships but at most " + std::to_string(*def.max_cardinality) +
                        " allowed");
            }
        }
    }

    std::sort(report.violations.begin(), report.violations.end());
    return report;
}

ValidationReport check_semantic(const kg::KnowledgeGraph& g) {
    ValidationReport report;

    std::vector<const kg::KGNode*> event_nodes;
    for (const auto& node : g.nodes) {
        if (node.node_type == kEventClass) event_nodes.push_back(&node);
    }
    if (event_nodes.empty()) {
        if (!g.empty()) {
            add(report, Stage::Semantic, "semantic/no-event", "graph",
                "the graph does not contain an \"Event\" node");
        }
    } else if (event_nodes.size() > 1) {
        add(report, Stage::Semantic, "semantic/multiple-events", "graph",
            "the graph contains " + std::to_string(event_nodes.size()) +
                " \"Event\" nodes; exactly one is allowed");
    }

    std::set<std::string> ids;
    for (const auto& node : g.nodes) ids.insert(node.id);
    for (size_t i = 0; i < g.relationships.size(); ++i) {
        const auto& rel = g.relationships[i];
        for (const std::string& endpoint : {rel.source_id, rel.target_id}) {
            if (!ids.count(endpoint)) {
                add(report, Stage::Semantic, "semantic/dangling-endpoint",
                    "relationship[" + std::to_string(i) + "]",
                    "relationship \"" + rel.rel_type + "\" points to undefined entity \"" +
                        endpoint + "\"");
            }
        }
    }

    std::map<std::string, std::vector<std::string>> by_key;
    for (const auto& node : g.nodes) by_key[kg::canonical_key(node)].push_back(node.id);
    for (const auto& [key, dup_ids] : by_key) {
        if (dup_ids.size() < 2) continue;
        std::string joined;
        for (const auto& id : dup_ids) {
            if (!joined.empty()) joined += ", ";
            joined += "\"" + id + "\"";
        }
        add(report, Stage::Semantic, "semantic/duplicate-node", dup_ids.front(),
            "nodes " + joined + " define the same entity");
    }

    // Undirected reachability from the Event node(s); edges with a dangling
    // endpoint do not connect anything.
    if (!event_nodes.empty()) {
        std::map<std::string, std::vector<std::string>> adjacency;
        for (const auto& rel : g.relationships) {
            if (!ids.count(rel.source_id) || !ids.count(rel.target_id)) continue;
            adjacency[rel.source_id].push_back(rel.target_id);
            adjacency[rel.target_id].push_back(rel.source_id);
        }
        std::set<std::string> reached;
        std::vector<std::string> stack;
        for (const auto* event : event_nodes) {
            if (reached.insert(event->id).second) stack.push_back(event->id);
        }
        while (!stack.empty()) {
            std::string id = std::move(stack.back());
            stack.pop_back();
            for (const auto& next : adjacency[id]) {
                if (reached.insert(next).second) stack.push_back(next);
            }
        }
        for (const auto& node : g.nodes) {
            if (!reached.count(node.id)) {
                add(report, Stage::Semantic, "semantic/disconnected", node.id,
                    "node \"" + node.id + "\" is not reachable from the \"Event\" node");
            }
        }
    }

    std::sort(report.violations.begin(), report.violations.end());
    return report;
}

ValidationReport merge(const ValidationReport& a, const ValidationReport& b) {
    ValidationReport out = a;
    out.violations.insert(out.violations.end(), b.violations.begin(), b.violations.end());
    out.checked_constraints += b.checked_constraints;
    std::sort(out.violations.begin(), out.violations.end());
    return out;
}

double violation_ratio(const std::vector<ValidationReport>& reports) {
    long long violations = 0;
    long long checked = 0;
    for (const auto& report : reports) {
        checked += report.checked_constraints;
        for (const auto& v : report.violations) {
            if (v.stage == Stage::Shape) ++violations;
        }
    }
    if (checked <= 0) throw EmptyInput("violation_ratio requires at least one checked constraint");
    return static_cast<double>(violations) / static_cast<double>(checked);
}

}  // namespace loggraph::validation
