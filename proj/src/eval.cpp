#include "loggraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "loggraph/errors.hpp"
#include "loggraph/util.hpp"

namespace loggraph::eval {

std::vector<GoldPair> load_gold_file(const std::string& path) {
    std::istringstream in(util::read_file(path));
    std::vector<GoldPair> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("event") ||
            !doc.contains("gold_graph")) {
            throw ConfigError("gold file " + path + ":" + std::to_string(line_no) +
                              " must be {event, gold_graph, gold_tactics?}");
        }
        GoldPair pair;
        const auto& ej = doc["event"];
        if (ej.is_string()) {
            pair.event.raw = ej.get<std::string>();
        } else if (ej.is_object()) {
            pair.event.raw = ej.value("raw", "");
            if (ej.contains("context") && ej["context"].is_string())
                pair.event.context = ej["context"].get<std::string>();
            if (ej.contains("session_key") && ej["session_key"].is_string())
                pair.event.session_key = ej["session_key"].get<std::string>();
            if (ej.contains("received_at") && ej["received_at"].is_string()) {
                if (auto micros = util::parse_datetime(ej["received_at"].get<std::string>()))
                    pair.event.received_at = *micros;
            }
        }
        auto parsed = kg::graph_from_json(doc["gold_graph"]);
        if (!parsed.ok()) {
            throw ConfigError("gold file " + path + ":" + std::to_string(line_no) +
                              " has an invalid gold_graph: " + parsed.error);
        }
        pair.gold_graph = std::move(*parsed.graph);
        if (doc.contains("gold_tactics") && doc["gold_tactics"].is_array()) {
            std::set<std::string> tactics;
            for (const auto& t : doc["gold_tactics"]) tactics.insert(t.get<std::string>());
            pair.gold_tactics = std::move(tactics);
        }
        out.push_back(std::move(pair));
    }
    return out;
}

namespace {

PRF prf_from_counts(double matched, double generated, double gold) {
    if (generated == 0.0 && gold == 0.0) return PRF{1.0, 1.0, 1.0};
    PRF out;
    out.precision = generated > 0.0 ? matched / generated : 0.0;
    out.recall = gold > 0.0 ? matched / gold : 0.0;
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

std::map<std::string, int> key_multiset(const kg::KnowledgeGraph& g) {
    std::map<std::string, int> out;
    for (const auto& node : g.nodes) out[kg::canonical_key(node)] += 1;
    return out;
}

std::string edge_key(const kg::KnowledgeGraph& g, const kg::KGRelationship& rel) {
    auto key_of = [&](const std::string& id) {
        const kg::KGNode* node = g.find_node(id);
        return node ? kg::canonical_key(*node) : "~missing:" + id;
    };
    return nlohmann::json::array({key_of(rel.source_id), rel.rel_type, key_of(rel.target_id)})
        .dump();
}

}  // namespace

PRF triple_prf(const kg::KnowledgeGraph& generated, const kg::KnowledgeGraph& gold) {
    const auto gen_triples = kg::to_triples(generated);
    const auto gold_triples = kg::to_triples(gold);
    if (gen_triples.empty() && gold_triples.empty()) return PRF{1.0, 1.0, 1.0};
    double matched = 0.0;
    for (const auto& t : gen_triples) {
        if (gold_triples.count(t)) matched += 1.0;
    }
    return prf_from_counts(matched, static_cast<double>(gen_triples.size()),
                           static_cast<double>(gold_triples.size()));
}

double entity_linking_accuracy(const kg::KnowledgeGraph& generated,
                               const kg::KnowledgeGraph& gold) {
    if (gold.nodes.empty()) return generated.nodes.empty() ? 1.0 : 0.0;
    const auto gen_keys = key_multiset(generated);
    const auto gold_keys = key_multiset(gold);
    int matched = 0;
    for (const auto& [key, count] : gen_keys) {
        auto it = gold_keys.find(key);
        if (it != gold_keys.end()) matched += std::min(count, it->second);
    }
    return static_cast<double>(matched) / static_cast<double>(gold.nodes.size());
}

double relationship_linking_accuracy(const kg::KnowledgeGraph& generated,
                                     const kg::KnowledgeGraph& gold) {
    if (gold.relationships.empty()) return generated.relationships.empty() ? 1.0 : 0.0;
    const auto gold_entities = key_multiset(gold);

    std::map<std::string, int> gold_edges;
    for (const auto& rel : gold.relationships) gold_edges[edge_key(gold, rel)] += 1;

    std::map<std::string, int> gen_edges;
    for (const auto& rel : generated.relationships) {
        const kg::KGNode* src = generated.find_node(rel.source_id);
        const kg::KGNode* tgt = generated.find_node(rel.target_id);
        if (!src || !tgt) continue;
        // Only edges between correct entities can count.
        if (!gold_entities.count(kg::canonical_key(*src)) ||
            !gold_entities.count(kg::canonical_key(*tgt))) {
            continue;
        }
        gen_edges[edge_key(generated, rel)] += 1;
    }
    int matched = 0;
    for (const auto& [key, count] : gen_edges) {
        auto it = gold_edges.find(key);
        if (it != gold_edges.end()) matched += std::min(count, it->second);
    }
    return static_cast<double>(matched) / static_cast<double>(gold.relationships.size());
}

PRF tactics_prf(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
    double matched = 0.0;
    for (const auto& t : predicted) {
        if (gold.count(t)) matched += 1.0;
    }
    return prf_from_counts(matched, static_cast<double>(predicted.size()),
                           static_cast<double>(gold.size()));
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json items_json = nlohmann::json::array();
    for (const auto& item : items) {
        items_json.push_back({{"raw_log", item.raw_log},
                              {"non_empty", item.generated_non_empty},
                              {"precision", item.triples.precision},
                              {"recall", item.triples.recall},
                              {"f1", item.triples.f1},
                              {"entity_linking_accuracy", item.entity_accuracy},
                              {"relationship_linking_accuracy", item.relationship_accuracy}});
    }
    return nlohmann::json{{"generation_success_ratio", generation_success_ratio},
                          {"shacl_violation_ratio", shacl_violation_ratio},
                          {"precision", precision},
                          {"recall", recall},
                          {"f1", f1},
                          {"entity_linking_accuracy", entity_linking_accuracy},
                          {"relationship_linking_accuracy", relationship_linking_accuracy},
                          {"items", std::move(items_json)}};
}

std::string MetricsReport::to_table() const {
    std::ostringstream out;
    char line[96];
    auto row = [&](const char* name, double value) {
        std::snprintf(line, sizeof(line), "%-34s %8.4f\n", name, value);
        out << line;
    };
    row("generation_success_ratio", generation_success_ratio);
    row("shacl_violation_ratio", shacl_violation_ratio);
    row("precision", precision);
    row("recall", recall);
    row("f1", f1);
    row("entity_linking_accuracy", entity_linking_accuracy);
    row("relationship_linking_accuracy", relationship_linking_accuracy);
    return out.str();
}

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out << "metric,value\n";
    out << "generation_success_ratio," << generation_success_ratio << "\n";
    out << "shacl_violation_ratio," << shacl_violation_ratio << "\n";
    out << "precision," << precision << "\n";
    out << "recall," << recall << "\n";
    out << "f1," << f1 << "\n";
    out << "entity_linking_accuracy," << entity_linking_accuracy << "\n";
    out << "relationship_linking_accuracy," << relationship_linking_accuracy << "\n";
    return out.str();
}

MetricsReport run_metrics(
    const std::vector<std::pair<pipeline::LogEvent, kg::KnowledgeGraph>>& run,
    const std::vector<GoldPair>& golds, const std::vector<validation::ValidationReport>& reports) {
    if (run.size() != golds.size()) {
        throw AlignmentError("run has " + std::to_string(run.size()) + " events but gold has " +
                             std::to_string(golds.size()));
    }
    MetricsReport report;
    double non_empty = 0.0;
    for (size_t i = 0; i < run.size(); ++i) {
        const auto& [event, generated] = run[i];
        const auto& gold = golds[i];
        if (event.raw != gold.event.raw) {
            throw AlignmentError("event " + std::to_string(i) +
                                 " does not match its gold entry: \"" + event.raw + "\" vs \"" +
                                 gold.event.raw + "\"");
        }
        ItemMetrics item;
        item.raw_log = event.raw;
        item.generated_non_empty = !generated.empty();
        item.triples = triple_prf(generated, gold.gold_graph);
        item.entity_accuracy = entity_linking_accuracy(generated, gold.gold_graph);
        item.relationship_accuracy = relationship_linking_accuracy(generated, gold.gold_graph);
        if (item.generated_non_empty) non_empty += 1.0;

        report.precision += item.triples.precision;
        report.recall += item.triples.recall;
        report.f1 += item.triples.f1;
        report.entity_linking_accuracy += item.entity_accuracy;
        report.relationship_linking_accuracy += item.relationship_accuracy;
        report.items.push_back(std::move(item));
    }
    const double n = static_cast<double>(run.size());
    if (n > 0.0) {
        report.generation_success_ratio = non_empty / n;
        report.precision /= n;
        report.recall /= n;
        report.f1 /= n;
        report.entity_linking_accuracy /= n;
        report.relationship_linking_accuracy /= n;
    }
    if (!reports.empty()) {
        report.shacl_violation_ratio = validation::violation_ratio(reports);
    }
    return report;
}

std::vector<std::string> sample_dataset(const std::vector<std::string>& events, int n,
                                        double threshold, std::uint64_t seed,
                                        const retrieval::Embedder& embedder) {
    if (n <= 0) return {};

    std::vector<std::string> pool = events;
    std::vector<std::vector<float>> pool_embeddings;
    pool_embeddings.reserve(pool.size());
    for (const auto& event : pool) pool_embeddings.push_back(embedder.embed(event));

    std::mt19937_64 rng(seed);
    // Modulo draw instead of uniform_int_distribution: the standard leaves
    // distribution output unspecified across implementations and seeds must
    // reproduce exactly.
    auto draw = [&rng](size_t bound) { return static_cast<size_t>(rng() % bound); };

    std::vector<std::string> selected;
    std::vector<std::vector<float>> selected_embeddings;
    while (selected.size() < static_cast<size_t>(n)) {
        if (pool.empty()) {
            throw DiversityExhausted("candidate pool exhausted after " +
                                     std::to_string(selected.size()) + " of " + std::to_string(n) +
                                     " picks at threshold " + std::to_string(threshold));
        }
        const size_t pick = draw(pool.size());
        const auto embedding = std::move(pool_embeddings[pick]);
        const std::string event = std::move(pool[pick]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        pool_embeddings.erase(pool_embeddings.begin() + static_cast<std::ptrdiff_t>(pick));

        bool unique = true;
        for (const auto& chosen : selected_embeddings) {
            const double distance = 1.0 - retrieval::cosine_similarity(embedding, chosen);
            if (distance < threshold) {
                unique = false;
                break;
            }
        }
        if (unique) {
            selected.push_back(event);
            selected_embeddings.push_back(embedding);
        }
    }
    return selected;
}

double geval_score(const pipeline::LogEvent& event, const kg::KnowledgeGraph& graph,
                   llm::Backend& judge) {
    llm::GenerationRequest request;
    request.messages = llm::build_geval_prompt(event.raw, graph);
    const std::string response = judge.invoke(request);

    // The judge reasons in free text; the verdict is the last number.
    std::optional<double> value;
    size_t i = 0;
    while (i < response.size()) {
        char c = response[i];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < response.size() &&
             std::isdigit(static_cast<unsigned char>(response[i + 1])))) {
            size_t end = i;
            bool dot = false;
            while (end < response.size() &&
                   (std::isdigit(static_cast<unsigned char>(response[end])) ||
                    (response[end] == '.' && !dot))) {
                if (response[end] == '.') dot = true;
                ++end;
            }
            try {
                value = std::stod(response.substr(i, end - i));
            } catch (...) {
            }
            i = end;
        } else {
            ++i;
        }
    }
    if (!value) throw ScoreParseError("judge answer contains no numeric score: " + response);
    if (*value < 0.0 || *value > 1.0) {
        throw ScoreParseError("judge score " + std::to_string(*value) + " outside [0, 1]");
    }
    return *value;
}

}  // namespace loggraph::eval
