#pragma once

#include <string>
#include <vector>

#include "loggraph/kg.hpp"
#include "loggraph/ontology.hpp"

namespace loggraph::validation {

enum class Stage { Syntactic, Shape, Semantic };

const char* stage_name(Stage s);

// Closed code enum; codes appear verbatim in correction prompts and reports.
struct Violation {
    Stage stage;
    std::string code;      // e.g. "shape/missing-required"
    std::string location;  // node id, "relationship[i]", or "graph"
    std::string message;   // deterministic templated text

    bool operator==(const Violation&) const = default;
    auto operator<=>(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;
    int checked_constraints = 0;

    bool clean() const { return violations.empty(); }
};

// Wraps a parse failure as a report carrying a single syntactic/malformed
// violation, so the correction loop sees one uniform shape.
ValidationReport syntactic_failure(const std::string& reason);

// SHACL-style shape checks: node types, property vocabulary and datatypes,
// required properties, relationship vocabulary, endpoint classes
// (subclass-aware) and relationship cardinalities. checked_constraints counts
// every evaluated check, violated or not; it is the violation-ratio
// denominator.
ValidationReport check_shapes(const kg::KnowledgeGraph& g, const ontology::OntologySchema& s);

// Graph-level consistency: exactly one Event node, no dangling relationship
// endpoints, no duplicate node definitions, every node reachable from the
// Event node (undirected).
ValidationReport check_semantic(const kg::KnowledgeGraph& g);

ValidationReport merge(const ValidationReport& a, const ValidationReport& b);

// Shape violations over checked shape constraints, aggregated per corpus.
// Throws EmptyInput when no report contributed a constraint.
double violation_ratio(const std::vector<ValidationReport>& reports);

}  // namespace loggraph::validation
