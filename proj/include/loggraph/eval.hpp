#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loggraph/kg.hpp"
#include "loggraph/llm.hpp"
#include "loggraph/pipeline.hpp"
#include "loggraph/retrieval.hpp"
#include "loggraph/validation.hpp"

namespace loggraph::eval {

struct GoldPair {
    pipeline::LogEvent event;
    kg::KnowledgeGraph gold_graph;
    std::optional<std::set<std::string>> gold_tactics;
};

std::vector<GoldPair> load_gold_file(const std::string& path);

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Triple-level precision/recall/F1 over id-independent canonical triples.
// Empty generated vs non-empty gold scores (0,0,0); two empty graphs (1,1,1).
PRF triple_prf(const kg::KnowledgeGraph& generated, const kg::KnowledgeGraph& gold);

// An entity counts as correct iff a gold node carries the identical
// (type, full normalized property map); accuracy is gold-sided.
double entity_linking_accuracy(const kg::KnowledgeGraph& generated, const kg::KnowledgeGraph& gold);

// Counts generated relationships whose endpoints are correct entities and
// whose typed edge exists in gold, over the gold relationships.
double relationship_linking_accuracy(const kg::KnowledgeGraph& generated,
                                     const kg::KnowledgeGraph& gold);

PRF tactics_prf(const std::set<std::string>& predicted, const std::set<std::string>& gold);

struct ItemMetrics {
    std::string raw_log;
    bool generated_non_empty = false;
    PRF triples;
    double entity_accuracy = 0.0;
    double relationship_accuracy = 0.0;
};

struct MetricsReport {
    double generation_success_ratio = 0.0;
    double shacl_violation_ratio = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double entity_linking_accuracy = 0.0;
    double relationship_linking_accuracy = 0.0;
    std::vector<ItemMetrics> items;

    nlohmann::json to_json() const;
    std::string to_table() const;
    std::string to_csv() const;
};

// Macro-averages the per-pair metrics; the violation ratio aggregates the
// supplied shape reports per corpus. Throws AlignmentError when runs and
// golds do not line up by event.
MetricsReport run_metrics(const std::vector<std::pair<pipeline::LogEvent, kg::KnowledgeGraph>>& run,
                          const std::vector<GoldPair>& golds,
                          const std::vector<validation::ValidationReport>& reports);

// Algorithm-style diversity sampler: uniform draws without replacement,
// rejecting candidates whose cosine distance to any already selected event
// falls below the threshold. Deterministic under a fixed seed. Throws
// DiversityExhausted when the pool runs out before n picks.
std::vector<std::string> sample_dataset(const std::vector<std::string>& events, int n,
                                        double threshold, std::uint64_t seed,
                                        const retrieval::Embedder& embedder);

// LLM-as-judge scoring; issues the three-step judging prompt and expects a
// score in [0, 1] (the last number in the answer). Throws ScoreParseError on
// out-of-range or unparsable answers.
double geval_score(const pipeline::LogEvent& event, const kg::KnowledgeGraph& graph,
                   llm::Backend& judge);

}  // namespace loggraph::eval
