#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace loggraph::ontology {

enum class Datatype { String, Integer, Float, Boolean, DateTime };

const char* datatype_name(Datatype dt);
std::optional<Datatype> datatype_from_name(const std::string& name);

struct PropertyDef {
    std::string name;
    Datatype datatype = Datatype::String;
    bool required = false;
    std::optional<int> max_cardinality;

    bool operator==(const PropertyDef&) const = default;
};

struct RelationshipDef {
    std::string name;
    std::string source_class;
    std::string target_class;
    int min_cardinality = 0;
    std::optional<int> max_cardinality;

    bool operator==(const RelationshipDef&) const = default;
    auto operator<=>(const RelationshipDef&) const = default;
};

struct ClassDef {
    std::string name;
    std::optional<std::string> parent;
    bool abstract = false;
    std::vector<PropertyDef> properties;
    // Carried verbatim into exports (e.g. "prov:Entity"); never reasoned over.
    std::optional<std::string> external_alignment;

    bool operator==(const ClassDef&) const = default;
};

// (source class, relationship name, target class)
using ClassTriple = std::tuple<std::string, std::string, std::string>;

class OntologySchema {
public:
    OntologySchema() = default;

    // Throws SchemaInconsistency when the invariants do not hold:
    // dangling parents, cyclic hierarchy, dangling relationship endpoints,
    // duplicate property names after flattening.
    OntologySchema(std::map<std::string, ClassDef> classes,
                   std::vector<RelationshipDef> relationships,
                   std::vector<ClassTriple> structural_triples,
                   std::string namespace_prefix = "olx",
                   std::string namespace_iri = "http://example.org/olx#");

    const std::map<std::string, ClassDef>& classes() const { return classes_; }
    const std::vector<RelationshipDef>& relationships() const { return relationships_; }
    const std::vector<ClassTriple>& structural_triples() const { return structural_triples_; }
    const std::string& namespace_prefix() const { return namespace_prefix_; }
    const std::string& namespace_iri() const { return namespace_iri_; }

    bool has_class(const std::string& name) const { return classes_.count(name) > 0; }
    const ClassDef* find_class(const std::string& name) const;

    // Reflexive-transitive closure of the parent relation.
    // Throws UnknownClass when either name is absent.
    bool is_subclass_of(const std::string& sub, const std::string& sup) const;

    // Declared + inherited properties, keyed by name.
    const std::map<std::string, PropertyDef>& flattened_properties(const std::string& cls) const;

    // Relationship triples expanded over the class hierarchy: a relationship
    // whose source is Parameter is allowed from every Parameter subclass.
    std::set<ClassTriple> allowed_triples() const;

    // All classes that are `cls` or one of its descendants, sorted by name.
    std::vector<std::string> subclasses_of(const std::string& cls) const;

    nlohmann::json to_descriptor() const;

private:
    std::map<std::string, ClassDef> classes_;
    std::vector<RelationshipDef> relationships_;
    std::vector<ClassTriple> structural_triples_;
    std::string namespace_prefix_ = "olx";
    std::string namespace_iri_ = "http://example.org/olx#";
    std::map<std::string, std::map<std::string, PropertyDef>> flattened_;
};

// Throws DescriptorParseError on malformed documents, SchemaInconsistency on
// invariant violations.
OntologySchema load_ontology(const nlohmann::json& descriptor);
OntologySchema load_ontology_text(const std::string& text);
OntologySchema load_ontology_file(const std::string& path);

}  // namespace loggraph::ontology
