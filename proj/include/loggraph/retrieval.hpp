#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace loggraph::retrieval {

// Lowercase, split on non-alphanumerics, drop tokens shorter than 2.
std::vector<std::string> tokenize(const std::string& text);

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<float> embed(const std::string& text) const = 0;
    virtual size_t dimension() const = 0;
};

// Deterministic embedder: seeded feature hashing of character trigrams,
// signed buckets, unit-normalized. Intended for offline runs and tests.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(size_t dimension = 64, std::uint64_t seed = 0);
    std::vector<float> embed(const std::string& text) const override;
    size_t dimension() const override { return dimension_; }
    std::uint64_t seed() const { return seed_; }

private:
    size_t dimension_;
    std::uint64_t seed_;
};

// Talks to an embeddings endpoint ({model, input} in, {data:[{embedding}]} out).
// Throws ProviderUnavailable when the service cannot be reached or answers
// with anything but a usable vector.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(std::string endpoint, std::string model, size_t dimension,
                   std::string api_key = "", int timeout_s = 30);
    std::vector<float> embed(const std::string& text) const override;
    size_t dimension() const override { return dimension_; }

private:
    std::string endpoint_;
    std::string model_;
    size_t dimension_;
    std::string api_key_;
    int timeout_s_;
};

struct ExemplarEntry {
    std::string id;
    std::string log_text;
    std::optional<std::string> context_text;
    std::string graph_ref;  // stored-graph id
    std::vector<float> embedding;
    std::map<std::string, int> tokens;  // term -> count, derived from the texts

    bool operator==(const ExemplarEntry&) const = default;
};

struct ScoredCandidate {
    std::string entry_id;
    std::optional<double> vector_score;
    std::optional<double> text_score;
    double fused_score = 0.0;
};

struct MMRParams {
    double lambda = 0.5;
    int select_count = 5;
    int candidate_pool = 20;
};

class ExemplarIndex {
public:
    // Throws DimensionMismatch when the entry's embedding does not match the
    // index dimension (fixed by the first insert).
    void add(ExemplarEntry entry);

    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const ExemplarEntry* find(const std::string& id) const;
    std::vector<std::string> ids() const;

    // Exhaustive top-k cosine scan, descending, ties broken by entry id.
    // Throws EmptyIndex on an empty index.
    std::vector<ScoredCandidate> vector_search(const std::vector<float>& query, int k) const;

    // BM25 (k1=1.2, b=0.75) over the token index; zero-score entries are
    // dropped. Throws EmptyIndex on an empty index.
    std::vector<ScoredCandidate> fulltext_search(const std::string& query, int k) const;

    // Persisted as two files under `dir`: embeddings.bin (u32 header length,
    // JSON header {dimension, count, ids}, float32 little-endian rows) and
    // postings.json. Throws StorageError on IO failures.
    void save(const std::string& dir) const;
    static ExemplarIndex load(const std::string& dir);

private:
    std::vector<ExemplarEntry> entries_;
    std::map<std::string, size_t> by_id_;
    size_t dimension_ = 0;
};

// Min-max normalizes each list independently, merges by entry id, and scores
// each candidate with the mean of its available normalized scores.
// Descending, stable tie-break by entry id.
std::vector<ScoredCandidate> fuse(const std::vector<ScoredCandidate>& vector_results,
                                  const std::vector<ScoredCandidate>& text_results);

// Greedy maximal-marginal-relevance selection:
//   MMR(d) = lambda * Sim(d, q) - (1 - lambda) * max_{s in S} Sim(d, s)
// with cosine similarity on both terms. The first pick maximizes Sim(d, q).
// Returns min(select_count, |pool|) entries; ties broken by entry id.
std::vector<ExemplarEntry> mmr_rerank(const std::vector<float>& query,
                                      const std::vector<ScoredCandidate>& pool,
                                      const MMRParams& params, const ExemplarIndex& index);

}  // namespace loggraph::retrieval
