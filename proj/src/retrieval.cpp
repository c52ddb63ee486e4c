#include "loggraph/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <fstream>

#include "httplib.h"
#include "json.hpp"
#include "loggraph/errors.hpp"
#include "loggraph/util.hpp"

namespace loggraph::retrieval {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            if (current.size() >= 2) tokens.push_back(current);
            current.clear();
        }
    }
    if (current.size() >= 2) tokens.push_back(current);
    return tokens;
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    const size_t n = std::min(a.size(), b.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    for (size_t i = n; i < a.size(); ++i) na += static_cast<double>(a[i]) * a[i];
    for (size_t i = n; i < b.size(); ++i) nb += static_cast<double>(b[i]) * b[i];
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

HashingEmbedder::HashingEmbedder(size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {}

std::vector<float> HashingEmbedder::embed(const std::string& text) const {
    std::vector<float> vec(dimension_, 0.0f);
    std::string lowered = util::to_lower(text);
    // Pad so even 1-char inputs produce a trigram.
    std::string padded = "  " + lowered + "  ";
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
        std::string_view gram(padded.data() + i, 3);
        std::uint64_t h = util::fnv1a64(gram) ^ (seed_ * 0x9e3779b97f4a7c15ULL);
        size_t bucket = static_cast<size_t>(h % dimension_);
        float sign = (h >> 63) ? -1.0f : 1.0f;
        vec[bucket] += sign;
    }
    double norm = 0.0;
    for (float v : vec) norm += static_cast<double>(v) * v;
    if (norm > 0.0) {
        const float inv = static_cast<float>(1.0 / std::sqrt(norm));
        for (float& v : vec) v *= inv;
    }
    return vec;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::string model, size_t dimension,
                               std::string api_key, int timeout_s)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      dimension_(dimension),
      api_key_(std::move(api_key)),
      timeout_s_(timeout_s) {}

namespace {

// Splits "http://host:port/path" into client base and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<float> RemoteEmbedder::embed(const std::string& text) const {
    auto [base, path] = split_url(endpoint_);
    httplib::Client client(base);
    client.set_connection_timeout(timeout_s_, 0);
    client.set_read_timeout(timeout_s_, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    nlohmann::json body{{"model", model_}, {"input", nlohmann::json::array({text})}};
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw ProviderUnavailable("embedding endpoint unreachable: " + endpoint_);
    if (res->status != 200) {
        throw ProviderUnavailable("embedding endpoint returned status " +
                                  std::to_string(res->status));
    }
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("data") || !doc["data"].is_array() ||
        doc["data"].empty() || !doc["data"][0].contains("embedding")) {
        throw ProviderUnavailable("embedding endpoint returned an unusable payload");
    }
    std::vector<float> out;
    for (const auto& v : doc["data"][0]["embedding"]) out.push_back(v.get<float>());
    if (dimension_ != 0 && out.size() != dimension_) {
        throw DimensionMismatch("embedding endpoint returned dimension " +
                                std::to_string(out.size()) + ", expected " +
                                std::to_string(dimension_));
    }
    return out;
}

void ExemplarIndex::add(ExemplarEntry entry) {
    if (entries_.empty()) {
        dimension_ = entry.embedding.size();
    } else if (entry.embedding.size() != dimension_) {
        throw DimensionMismatch("entry \"" + entry.id + "\" has embedding dimension " +
                                std::to_string(entry.embedding.size()) + ", index uses " +
                                std::to_string(dimension_));
    }
    if (entry.tokens.empty()) {
        std::string text = entry.log_text;
        if (entry.context_text) text += " " + *entry.context_text;
        for (const auto& token : tokenize(text)) entry.tokens[token] += 1;
    }
    auto it = by_id_.find(entry.id);
    if (it != by_id_.end()) {
        entries_[it->second] = std::move(entry);
        return;
    }
    by_id_.emplace(entry.id, entries_.size());
    entries_.push_back(std::move(entry));
}

const ExemplarEntry* ExemplarIndex::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::string> ExemplarIndex::ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.id);
    return out;
}

std::vector<ScoredCandidate> ExemplarIndex::vector_search(const std::vector<float>& query,
                                                          int k) const {
    if (entries_.empty()) throw EmptyIndex("vector_search on empty index");
    std::vector<ScoredCandidate> scored;
    scored.reserve(entries_.size());
    for (const auto& entry : entries_) {
        ScoredCandidate c;
        c.entry_id = entry.id;
        c.vector_score = cosine_similarity(query, entry.embedding);
        scored.push_back(std::move(c));
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (*a.vector_score != *b.vector_score) return *a.vector_score > *b.vector_score;
        return a.entry_id < b.entry_id;
    });
    if (k >= 0 && scored.size() > static_cast<size_t>(k)) scored.resize(static_cast<size_t>(k));
    return scored;
}

std::vector<ScoredCandidate> ExemplarIndex::fulltext_search(const std::string& query,
                                                            int k) const {
    if (entries_.empty()) throw EmptyIndex("fulltext_search on empty index");
    constexpr double k1 = 1.2;
    constexpr double b = 0.75;

    const double n_docs = static_cast<double>(entries_.size());
    double total_len = 0.0;
    for (const auto& entry : entries_) {
        for (const auto& [_, count] : entry.tokens) total_len += count;
    }
    const double avg_len = total_len > 0.0 ? total_len / n_docs : 1.0;

    // Distinct query terms, each weighted once.
    std::vector<std::string> terms;
    for (const auto& token : tokenize(query)) {
        if (std::find(terms.begin(), terms.end(), token) == terms.end()) terms.push_back(token);
    }
    std::map<std::string, double> idf;
    for (const auto& term : terms) {
        double df = 0.0;
        for (const auto& entry : entries_) {
            if (entry.tokens.count(term)) df += 1.0;
        }
        idf[term] = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
    }

    std::vector<ScoredCandidate> scored;
    for (const auto& entry : entries_) {
        double doc_len = 0.0;
        for (const auto& [_, count] : entry.tokens) doc_len += count;
        double score = 0.0;
        for (const auto& term : terms) {
            auto it = entry.tokens.find(term);
            if (it == entry.tokens.end()) continue;
            const double tf = static_cast<double>(it->second);
            score += idf[term] * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * doc_len / avg_len));
        }
        if (score > 0.0) {
            ScoredCandidate c;
            c.entry_id = entry.id;
            c.text_score = score;
            scored.push_back(std::move(c));
        }
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b2) {
        if (*a.text_score != *b2.text_score) return *a.text_score > *b2.text_score;
        return a.entry_id < b2.entry_id;
    });
    if (k >= 0 && scored.size() > static_cast<size_t>(k)) scored.resize(static_cast<size_t>(k));
    return scored;
}

void ExemplarIndex::save(const std::string& dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw StorageError("cannot create index directory: " + dir);

    nlohmann::json header{{"dimension", dimension_}, {"count", entries_.size()}};
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& entry : entries_) ids.push_back(entry.id);
    header["ids"] = std::move(ids);
    const std::string header_text = header.dump();

    std::ofstream emb(fs::path(dir) / "embeddings.bin", std::ios::binary | std::ios::trunc);
    if (!emb) throw StorageError("cannot write embeddings file in " + dir);
    const std::uint32_t header_len = static_cast<std::uint32_t>(header_text.size());
    char len_bytes[4] = {static_cast<char>(header_len & 0xff),
                         static_cast<char>((header_len >> 8) & 0xff),
                         static_cast<char>((header_len >> 16) & 0xff),
                         static_cast<char>((header_len >> 24) & 0xff)};
    emb.write(len_bytes, 4);
    emb.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& entry : entries_) {
        for (float v : entry.embedding) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            char row[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff),
                           static_cast<char>((bits >> 24) & 0xff)};
            emb.write(row, 4);
        }
    }
    if (!emb) throw StorageError("write failed for embeddings file in " + dir);
    emb.close();

    nlohmann::json postings = nlohmann::json::object();
    nlohmann::json docs = nlohmann::json::object();
    for (const auto& entry : entries_) {
        nlohmann::json doc{{"log_text", entry.log_text}, {"graph_ref", entry.graph_ref}};
        if (entry.context_text) doc["context_text"] = *entry.context_text;
        docs[entry.id] = std::move(doc);
        for (const auto& [term, count] : entry.tokens) postings[term][entry.id] = count;
    }
    nlohmann::json doc{{"version", 1}, {"documents", std::move(docs)}, {"postings", std::move(postings)}};
    util::write_file_atomic((fs::path(dir) / "postings.json").string(), doc.dump(2) + "\n");
}

ExemplarIndex ExemplarIndex::load(const std::string& dir) {
    namespace fs = std::filesystem;
    const std::string emb_path = (fs::path(dir) / "embeddings.bin").string();
    const std::string postings_path = (fs::path(dir) / "postings.json").string();

    std::ifstream emb(emb_path, std::ios::binary);
    if (!emb) throw StorageError("cannot open " + emb_path);
    char len_bytes[4];
    emb.read(len_bytes, 4);
    if (!emb) throw StorageError("truncated embeddings header in " + emb_path);
    const std::uint32_t header_len = static_cast<std::uint8_t>(len_bytes[0]) |
                                     (static_cast<std::uint8_t>(len_bytes[1]) << 8) |
                                     (static_cast<std::uint8_t>(len_bytes[2]) << 16) |
                                     (static_cast<std::uint8_t>(len_bytes[3]) << 24);
    std::string header_text(header_len, '\0');
    emb.read(header_text.data(), header_len);
    if (!emb) throw StorageError("truncated embeddings header in " + emb_path);
    nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
    if (header.is_discarded() || !header.contains("dimension") || !header.contains("ids")) {
        throw StorageError("malformed embeddings header in " + emb_path);
    }
    const size_t dimension = header["dimension"].get<size_t>();
    const auto ids = header["ids"].get<std::vector<std::string>>();

    nlohmann::json postings_doc = nlohmann::json::parse(util::read_file(postings_path), nullptr, false);
    if (postings_doc.is_discarded() || !postings_doc.contains("documents")) {
        throw StorageError("malformed postings file " + postings_path);
    }
    const auto& docs = postings_doc["documents"];

    ExemplarIndex index;
    for (const auto& id : ids) {
        ExemplarEntry entry;
        entry.id = id;
        entry.embedding.resize(dimension);
        for (size_t i = 0; i < dimension; ++i) {
            char row[4];
            emb.read(row, 4);
            if (!emb) throw StorageError("truncated embedding rows in " + emb_path);
            std::uint32_t bits = static_cast<std::uint8_t>(row[0]) |
                                 (static_cast<std::uint8_t>(row[1]) << 8) |
                                 (static_cast<std::uint8_t>(row[2]) << 16) |
                                 (static_cast<std::uint8_t>(row[3]) << 24);
            float v;
            std::memcpy(&v, &bits, 4);
            entry.embedding[i] = v;
        }
        if (!docs.contains(id)) throw StorageError("postings file is missing document \"" + id + "\"");
        const auto& doc = docs[id];
        entry.log_text = doc.value("log_text", "");
        if (doc.contains("context_text")) entry.context_text = doc["context_text"].get<std::string>();
        entry.graph_ref = doc.value("graph_ref", "");
        index.add(std::move(entry));
    }
    return index;
}

std::vector<ScoredCandidate> fuse(const std::vector<ScoredCandidate>& vector_results,
                                  const std::vector<ScoredCandidate>& text_results) {
    // Min-max to [0, 1]; a constant list maps to all-ones.
    auto normalized = [](const std::vector<ScoredCandidate>& results, bool vector_side) {
        std::map<std::string, double> out;
        if (results.empty()) return out;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& r : results) {
            const double raw = vector_side ? *r.vector_score : *r.text_score;
            lo = std::min(lo, raw);
            hi = std::max(hi, raw);
        }
        for (const auto& r : results) {
            const double raw = vector_side ? *r.vector_score : *r.text_score;
            out[r.entry_id] = hi > lo ? (raw - lo) / (hi - lo) : 1.0;
        }
        return out;
    };
    const auto vec_norm = normalized(vector_results, true);
    const auto text_norm = normalized(text_results, false);

    std::map<std::string, ScoredCandidate> merged;
    for (const auto& r : vector_results) {
        auto& c = merged[r.entry_id];
        c.entry_id = r.entry_id;
        c.vector_score = r.vector_score;
    }
    for (const auto& r : text_results) {
        auto& c = merged[r.entry_id];
        c.entry_id = r.entry_id;
        c.text_score = r.text_score;
    }
    std::vector<ScoredCandidate> out;
    out.reserve(merged.size());
    for (auto& [id, c] : merged) {
        double sum = 0.0;
        int parts = 0;
        if (auto it = vec_norm.find(id); it != vec_norm.end()) {
            sum += it->second;
            ++parts;
        }
        if (auto it = text_norm.find(id); it != text_norm.end()) {
            sum += it->second;
            ++parts;
        }
        c.fused_score = parts > 0 ? sum / parts : 0.0;
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.fused_score != b.fused_score) return a.fused_score > b.fused_score;
        return a.entry_id < b.entry_id;
    });
    return out;
}

std::vector<ExemplarEntry> mmr_rerank(const std::vector<float>& query,
                                      const std::vector<ScoredCandidate>& pool,
                                      const MMRParams& params, const ExemplarIndex& index) {
    struct Candidate {
        const ExemplarEntry* entry;
        double query_sim;
    };
    std::vector<Candidate> remaining;
    for (const auto& scored : pool) {
        const ExemplarEntry* entry = index.find(scored.entry_id);
        if (!entry) continue;
        remaining.push_back(Candidate{entry, cosine_similarity(query, entry->embedding)});
    }

    std::vector<ExemplarEntry> selected;
    const size_t want = std::min<size_t>(static_cast<size_t>(std::max(params.select_count, 0)),
                                         remaining.size());
    while (selected.size() < want) {
        size_t best = 0;
        double best_score = 0.0;
        bool have_best = false;
        for (size_t i = 0; i < remaining.size(); ++i) {
            double redundancy = 0.0;
            for (const auto& chosen : selected) {
                redundancy = std::max(
                    redundancy, cosine_similarity(remaining[i].entry->embedding, chosen.embedding));
            }
            // With S empty the diversity term vanishes and the first pick is
            // the pure argmax of Sim(d, q).
            const double score = selected.empty()
                                     ? params.lambda * remaining[i].query_sim
                                     : params.lambda * remaining[i].query_sim -
                                           (1.0 - params.lambda) * redundancy;
            if (!have_best || score > best_score ||
                (score == best_score && remaining[i].entry->id < remaining[best].entry->id)) {
                best = i;
                best_score = score;
                have_best = true;
            }
        }
        selected.push_back(*remaining[best].entry);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return selected;
}

}  // namespace loggraph::retrieval
