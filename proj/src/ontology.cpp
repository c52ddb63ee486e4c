#include "loggraph/ontology.hpp"

#include <algorithm>

#include "loggraph/errors.hpp"
#include "loggraph/util.hpp"

namespace loggraph::ontology {

const char* datatype_name(Datatype dt) {
    switch (dt) {
        case Datatype::String: return "string";
        case Datatype::Integer: return "integer";
        case Datatype::Float: return "float";
        case Datatype::Boolean: return "boolean";
        case Datatype::DateTime: return "datetime";
    }
    return "string";
}

std::optional<Datatype> datatype_from_name(const std::string& name) {
    if (name == "string") return Datatype::String;
    if (name == "integer") return Datatype::Integer;
    if (name == "float") return Datatype::Float;
    if (name == "boolean") return Datatype::Boolean;
    if (name == "datetime") return Datatype::DateTime;
    return std::nullopt;
}

OntologySchema::OntologySchema(std::map<std::string, ClassDef> classes,
                               std::vector<RelationshipDef> relationships,
                               std::vector<ClassTriple> structural_triples,
                               std::string namespace_prefix, std::string namespace_iri)
    : classes_(std::move(classes)),
      relationships_(std::move(relationships)),
      structural_triples_(std::move(structural_triples)),
      namespace_prefix_(std::move(namespace_prefix)),
      namespace_iri_(std::move(namespace_iri)) {
    for (const auto& [name, def] : classes_) {
        if (def.parent && !classes_.count(*def.parent)) {
            throw SchemaInconsistency("class '" + name + "' references missing parent '" +
                                      *def.parent + "'");
        }
        for (const auto& prop : def.properties) {
            if (prop.max_cardinality && *prop.max_cardinality < 1) {
                throw SchemaInconsistency("property '" + prop.name +
                                          "' has non-positive max_cardinality");
            }
            if (prop.required && prop.max_cardinality && *prop.max_cardinality < 1) {
                throw SchemaInconsistency("required property '" + prop.name +
                                          "' with max_cardinality < 1");
            }
        }
    }
    // Cycle detection: walk each parent chain, bounded by class count.
    for (const auto& [name, def] : classes_) {
        const ClassDef* cur = &def;
        size_t steps = 0;
        while (cur->parent) {
            if (++steps > classes_.size()) {
                throw SchemaInconsistency("cyclic class hierarchy involving '" + name + "'");
            }
            cur = &classes_.at(*cur->parent);
        }
    }
    for (const auto& rel : relationships_) {
        if (!classes_.count(rel.source_class)) {
            throw SchemaInconsistency("relationship '" + rel.name +
                                      "' references missing source class '" + rel.source_class +
                                      "'");
        }
        if (!classes_.count(rel.target_class)) {
            throw SchemaInconsistency("relationship '" + rel.name +
                                      "' references missing target class '" + rel.target_class +
                                      "'");
        }
        if (rel.min_cardinality < 0) {
            throw SchemaInconsistency("relationship '" + rel.name + "' has negative min_cardinality");
        }
        if (rel.max_cardinality &&
            (*rel.max_cardinality < 1 || *rel.max_cardinality < rel.min_cardinality)) {
            throw SchemaInconsistency("relationship '" + rel.name + "' has inconsistent cardinality");
        }
    }
    for (const auto& [a, r, b] : structural_triples_) {
        if (!classes_.count(a) || !classes_.count(b)) {
            throw SchemaInconsistency("structural triple (" + a + ", " + r + ", " + b +
                                      ") references a missing class");
        }
    }
    // Flatten property maps; duplicate names across the chain are an error.
    for (const auto& [name, def] : classes_) {
        std::map<std::string, PropertyDef> flat;
        const ClassDef* cur = &def;
        while (true) {
            for (const auto& prop : cur->properties) {
                auto [it, inserted] = flat.emplace(prop.name, prop);
                if (!inserted) {
                    throw SchemaInconsistency("property '" + prop.name +
                                              "' duplicated in hierarchy of class '" + name + "'");
                }
            }
            if (!cur->parent) break;
            cur = &classes_.at(*cur->parent);
        }
        flattened_[name] = std::move(flat);
    }
}

const ClassDef* OntologySchema::find_class(const std::string& name) const {
    auto it = classes_.find(name);
    return it == classes_.end() ? nullptr : &it->second;
}

bool OntologySchema::is_subclass_of(const std::string& sub, const std::string& sup) const {
    if (!classes_.count(sub)) throw UnknownClass("unknown class '" + sub + "'");
    if (!classes_.count(sup)) throw UnknownClass("unknown class '" + sup + "'");
    const ClassDef* cur = &classes_.at(sub);
    while (true) {
        if (cur->name == sup) return true;
        if (!cur->parent) return false;
        cur = &classes_.at(*cur->parent);
    }
}

const std::map<std::string, PropertyDef>& OntologySchema::flattened_properties(
    const std::string& cls) const {
    auto it = flattened_.find(cls);
    if (it == flattened_.end()) throw UnknownClass("unknown class '" + cls + "'");
    return it->second;
}

std::vector<std::string> OntologySchema::subclasses_of(const std::string& cls) const {
    std::vector<std::string> out;
    for (const auto& [name, def] : classes_) {
        if (is_subclass_of(name, cls)) out.push_back(name);
    }
    return out;
}

std::set<ClassTriple> OntologySchema::allowed_triples() const {
    std::set<ClassTriple> out;
    for (const auto& rel : relationships_) {
        for (const auto& src : subclasses_of(rel.source_class)) {
            for (const auto& tgt : subclasses_of(rel.target_class)) {
                out.emplace(src, rel.name, tgt);
            }
        }
    }
    return out;
}

nlohmann::json OntologySchema::to_descriptor() const {
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [name, def] : classes_) {
        nlohmann::json props = nlohmann::json::array();
        for (const auto& p : def.properties) {
            nlohmann::json pj{{"name", p.name},
                              {"datatype", datatype_name(p.datatype)},
                              {"required", p.required}};
            if (p.max_cardinality) pj["max_cardinality"] = *p.max_cardinality;
            props.push_back(std::move(pj));
        }
        nlohmann::json cj{{"abstract", def.abstract}, {"properties", std::move(props)}};
        if (def.parent) cj["parent"] = *def.parent;
        if (def.external_alignment) cj["external_alignment"] = *def.external_alignment;
        classes[name] = std::move(cj);
    }
    nlohmann::json rels = nlohmann::json::array();
    auto sorted_rels = relationships_;
    std::sort(sorted_rels.begin(), sorted_rels.end());
    for (const auto& r : sorted_rels) {
        nlohmann::json rj{{"name", r.name},
                          {"source_class", r.source_class},
                          {"target_class", r.target_class},
                          {"min_cardinality", r.min_cardinality}};
        if (r.max_cardinality) rj["max_cardinality"] = *r.max_cardinality;
        rels.push_back(std::move(rj));
    }
    nlohmann::json triples = nlohmann::json::array();
    auto sorted_triples = structural_triples_;
    std::sort(sorted_triples.begin(), sorted_triples.end());
    for (const auto& [a, r, b] : sorted_triples) {
        triples.push_back(nlohmann::json::array({a, r, b}));
    }
    return nlohmann::json{{"namespace_prefix", namespace_prefix_},
                          {"namespace_iri", namespace_iri_},
                          {"classes", std::move(classes)},
                          {"relationships", std::move(rels)},
                          {"structural_triples", std::move(triples)}};
}

namespace {

PropertyDef parse_property(const nlohmann::json& pj) {
    if (!pj.is_object() || !pj.contains("name") || !pj["name"].is_string()) {
        throw DescriptorParseError("property definition requires a string 'name'");
    }
    PropertyDef def;
    def.name = pj["name"].get<std::string>();
    if (pj.contains("datatype")) {
        if (!pj["datatype"].is_string()) throw DescriptorParseError("property 'datatype' must be a string");
        auto dt = datatype_from_name(pj["datatype"].get<std::string>());
        if (!dt) {
            throw DescriptorParseError("unknown datatype '" + pj["datatype"].get<std::string>() +
                                       "' for property '" + def.name + "'");
        }
        def.datatype = *dt;
    }
    if (pj.contains("required")) {
        if (!pj["required"].is_boolean()) throw DescriptorParseError("property 'required' must be a boolean");
        def.required = pj["required"].get<bool>();
    }
    if (pj.contains("max_cardinality") && !pj["max_cardinality"].is_null()) {
        if (!pj["max_cardinality"].is_number_integer()) {
            throw DescriptorParseError("property 'max_cardinality' must be an integer");
        }
        def.max_cardinality = pj["max_cardinality"].get<int>();
    }
    return def;
}

}  // namespace

OntologySchema load_ontology(const nlohmann::json& doc) {
    if (!doc.is_object()) throw DescriptorParseError("descriptor root must be an object");
    for (const char* key : {"classes", "relationships", "structural_triples"}) {
        if (!doc.contains(key)) throw DescriptorParseError(std::string("descriptor missing '") + key + "'");
    }
    if (!doc["classes"].is_object()) throw DescriptorParseError("'classes' must be an object");
    if (!doc["relationships"].is_array()) throw DescriptorParseError("'relationships' must be an array");
    if (!doc["structural_triples"].is_array()) {
        throw DescriptorParseError("'structural_triples' must be an array");
    }

    std::map<std::string, ClassDef> classes;
    for (const auto& [name, cj] : doc["classes"].items()) {
        if (!cj.is_object()) throw DescriptorParseError("class '" + name + "' must be an object");
        ClassDef def;
        def.name = name;
        if (cj.contains("parent") && !cj["parent"].is_null()) {
            if (!cj["parent"].is_string()) throw DescriptorParseError("class 'parent' must be a string");
            def.parent = cj["parent"].get<std::string>();
        }
        if (cj.contains("abstract")) {
            if (!cj["abstract"].is_boolean()) throw DescriptorParseError("class 'abstract' must be a boolean");
            def.abstract = cj["abstract"].get<bool>();
        }
        if (cj.contains("external_alignment") && !cj["external_alignment"].is_null()) {
            if (!cj["external_alignment"].is_string()) {
                throw DescriptorParseError("class 'external_alignment' must be a string");
            }
            def.external_alignment = cj["external_alignment"].get<std::string>();
        }
        if (cj.contains("properties")) {
            if (!cj["properties"].is_array()) throw DescriptorParseError("class 'properties' must be an array");
            for (const auto& pj : cj["properties"]) def.properties.push_back(parse_property(pj));
        }
        classes.emplace(name, std::move(def));
    }

    std::vector<RelationshipDef> relationships;
    for (const auto& rj : doc["relationships"]) {
        if (!rj.is_object()) throw DescriptorParseError("relationship entries must be objects");
        for (const char* key : {"name", "source_class", "target_class"}) {
            if (!rj.contains(key) || !rj[key].is_string()) {
                throw DescriptorParseError(std::string("relationship requires string '") + key + "'");
            }
        }
        RelationshipDef def;
        def.name = rj["name"].get<std::string>();
        def.source_class = rj["source_class"].get<std::string>();
        def.target_class = rj["target_class"].get<std::string>();
        if (rj.contains("min_cardinality")) {
            if (!rj["min_cardinality"].is_number_integer()) {
                throw DescriptorParseError("relationship 'min_cardinality' must be an integer");
            }
            def.min_cardinality = rj["min_cardinality"].get<int>();
        }
        if (rj.contains("max_cardinality") && !rj["max_cardinality"].is_null()) {
            if (!rj["max_cardinality"].is_number_integer()) {
                throw DescriptorParseError("relationship 'max_cardinality' must be an integer");
            }
            def.max_cardinality = rj["max_cardinality"].get<int>();
        }
        relationships.push_back(std::move(def));
    }

    std::vector<ClassTriple> structural;
    for (const auto& tj : doc["structural_triples"]) {
        if (!tj.is_array() || tj.size() != 3 || !tj[0].is_string() || !tj[1].is_string() ||
            !tj[2].is_string()) {
            throw DescriptorParseError("structural triples must be [class, relation, class] arrays");
        }
        structural.emplace_back(tj[0].get<std::string>(), tj[1].get<std::string>(),
                                tj[2].get<std::string>());
    }

    std::string prefix = "olx";
    std::string iri = "http://example.org/olx#";
    if (doc.contains("namespace_prefix")) {
        if (!doc["namespace_prefix"].is_string()) {
            throw DescriptorParseError("'namespace_prefix' must be a string");
        }
        prefix = doc["namespace_prefix"].get<std::string>();
    }
    if (doc.contains("namespace_iri")) {
        if (!doc["namespace_iri"].is_string()) throw DescriptorParseError("'namespace_iri' must be a string");
        iri = doc["namespace_iri"].get<std::string>();
    }

    return OntologySchema(std::move(classes), std::move(relationships), std::move(structural),
                          std::move(prefix), std::move(iri));
}

OntologySchema load_ontology_text(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw DescriptorParseError("descriptor is not valid JSON");
    return load_ontology(doc);
}

OntologySchema load_ontology_file(const std::string& path) {
    return load_ontology_text(util::read_file(path));
}

}  // namespace loggraph::ontology
