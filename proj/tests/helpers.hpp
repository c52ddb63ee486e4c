#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "loggraph/eval.hpp"
#include "loggraph/kg.hpp"
#include "loggraph/ontology.hpp"
#include "loggraph/util.hpp"

#ifndef LOGGRAPH_TEST_DIR
#define LOGGRAPH_TEST_DIR "tests"
#endif

namespace helpers {

inline std::string test_dir() { return LOGGRAPH_TEST_DIR; }
inline std::string fixture_path(const std::string& name) {
    return test_dir() + "/fixtures/" + name;
}
inline std::string golden_path(const std::string& name) {
    return test_dir() + "/golden/" + name;
}

inline const loggraph::ontology::OntologySchema& default_schema() {
    static const loggraph::ontology::OntologySchema schema =
        loggraph::ontology::load_ontology_file(loggraph::llm::data_dir() + "/ontology.json");
    return schema;
}

// Scratch directory under the build tree, wiped on entry.
inline std::string scratch_dir(const std::string& name) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "loggraph_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

inline loggraph::kg::KGNode make_node(std::string id, std::string type,
                                      std::map<std::string, loggraph::kg::Value> props = {}) {
    return loggraph::kg::KGNode{std::move(id), std::move(type), std::move(props)};
}

inline loggraph::kg::KGRelationship make_rel(std::string src, std::string tgt, std::string type) {
    return loggraph::kg::KGRelationship{std::move(src), std::move(tgt), std::move(type)};
}

// A graph that passes every shape and semantic check against the shipped
// descriptor; the seed for the mutation catalog.
inline loggraph::kg::KnowledgeGraph clean_graph() {
    loggraph::kg::KnowledgeGraph g;
    g.nodes = {
        make_node("e1", "Event",
                  {{"eventMessage",
                    std::string("Accepted password for alice from 10.0.0.5 port 51234 ssh2")},
                   {"eventAction", std::string("authenticate")}}),
        make_node("s1", "Source",
                  {{"sourceName", std::string("sshd")}, {"sourceHost", std::string("bastion-01")}}),
        make_node("t1", "TimeStamp", {{"timeValue", std::string("2022-01-21T03:49:44Z")}}),
        make_node("u1", "User", {{"userUID", std::string("alice")}}),
        make_node("c1", "Command", {{"parameterValue", std::string("ssh2")}}),
        make_node("p1", "UserPassword", {{"credentialValue", std::string("hunter2")}}),
    };
    g.relationships = {
        make_rel("e1", "s1", "producedBy"),   make_rel("e1", "t1", "hasParameter"),
        make_rel("e1", "u1", "hasParameter"), make_rel("e1", "c1", "hasParameter"),
        make_rel("u1", "p1", "hasCredential"),
    };
    return g;
}

inline std::vector<loggraph::eval::GoldPair> gold_fixture() {
    return loggraph::eval::load_gold_file(fixture_path("gold.jsonl"));
}

// Independent triple oracle: multiset of (subject, predicate, object) strings
// derived directly from the graph, on purpose not sharing any code with
// kg::to_triples.
inline std::multiset<std::string> oracle_triples(const loggraph::kg::KnowledgeGraph& g) {
    auto normalize = [](const loggraph::kg::Value& v) {
        return loggraph::kg::tagged_literal(loggraph::kg::normalize_value(v));
    };
    auto key_of_node = [&](const loggraph::kg::KGNode& n) {
        std::string key = n.node_type + "(";
        for (const auto& [name, value] : n.properties) {
            key += name + "=" + normalize(value) + ";";
        }
        return key + ")";
    };
    std::map<std::string, std::string> keys;
    for (const auto& n : g.nodes) keys[n.id] = key_of_node(n);
    std::set<std::string> out;  // set: duplicate keys collapse, like to_triples
    for (const auto& n : g.nodes) {
        for (const auto& [name, value] : n.properties) {
            out.insert(keys[n.id] + " --" + name + "--> LIT:" + normalize(value));
        }
    }
    auto endpoint = [&](const std::string& id) {
        auto it = keys.find(id);
        return it == keys.end() ? "MISSING:" + id : it->second;
    };
    for (const auto& r : g.relationships) {
        out.insert(endpoint(r.source_id) + " --" + r.rel_type + "--> ENT:" + endpoint(r.target_id));
    }
    return {out.begin(), out.end()};
}

// Random small graphs over a tiny vocabulary, for oracle-equivalence sweeps.
inline loggraph::kg::KnowledgeGraph random_graph(std::mt19937_64& rng, int max_nodes = 6) {
    using loggraph::kg::Value;
    static const std::vector<std::string> types = {"Event", "Source", "User", "Command",
                                                   "NetworkEndpoint"};
    static const std::vector<std::string> props = {"eventMessage", "sourceName", "userUID",
                                                   "commandLine", "networkPort"};
    static const std::vector<std::string> rels = {"producedBy", "hasParameter", "hasCredential"};
    loggraph::kg::KnowledgeGraph g;
    const int n_nodes = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes));
    for (int i = 0; i < n_nodes; ++i) {
        loggraph::kg::KGNode node;
        node.id = "n" + std::to_string(i);
        node.node_type = types[rng() % types.size()];
        const int n_props = static_cast<int>(rng() % 3);
        for (int p = 0; p < n_props; ++p) {
            const auto& name = props[rng() % props.size()];
            switch (rng() % 3) {
                case 0: node.properties[name] = static_cast<std::int64_t>(rng() % 100); break;
                case 1: node.properties[name] = std::string("v") + std::to_string(rng() % 5); break;
                default: node.properties[name] = (rng() % 2) == 0; break;
            }
        }
        g.nodes.push_back(std::move(node));
    }
    const int n_rels = static_cast<int>(rng() % (static_cast<unsigned>(n_nodes) + 1));
    for (int i = 0; i < n_rels; ++i) {
        loggraph::kg::KGRelationship rel;
        rel.source_id = "n" + std::to_string(rng() % static_cast<unsigned>(n_nodes));
        rel.target_id = "n" + std::to_string(rng() % static_cast<unsigned>(n_nodes));
        rel.rel_type = rels[rng() % rels.size()];
        g.relationships.push_back(std::move(rel));
    }
    return g;
}

// Deterministic valid graph for a synthetic event; doubles as the stub
// response and as the gold annotation in end-to-end fixtures.
inline loggraph::kg::KnowledgeGraph derive_graph_for(const std::string& raw, int index) {
    loggraph::kg::KnowledgeGraph g;
    g.nodes = {
        make_node("e1", "Event",
                  {{"eventMessage", raw}, {"eventAction", std::string("observe")}}),
        make_node("s1", "Source", {{"sourceName", std::string("sensor-") +
                                                       std::to_string(index % 3)}}),
        make_node("u1", "User", {{"userUID", std::string("user") + std::to_string(index)}}),
    };
    g.relationships = {make_rel("e1", "s1", "producedBy"), make_rel("e1", "u1", "hasParameter")};
    return g;
}

struct StreamFixture {
    std::string events_path;
    std::string stub_path;
    std::string gold_path;
    std::vector<loggraph::pipeline::LogEvent> events;
};

// Writes an n-event stream, a keyed stub fixture answering every event with
// its derived graph, and the aligned gold file.
inline StreamFixture write_stream_fixture(const std::string& dir, int n_events,
                                          int session_size = 5) {
    StreamFixture fixture;
    fixture.events_path = dir + "/events.jsonl";
    fixture.stub_path = dir + "/stub.json";
    fixture.gold_path = dir + "/gold.jsonl";

    static const std::vector<std::string> patterns = {
        "sshd[%d]: Accepted password for user%d from 10.0.%d.5 port 51234 ssh2",
        "sshd[%d]: Failed password for root from 203.0.113.%d port 40022 ssh2",
        "CRON[%d]: (user%d) CMD (/usr/bin/uptime)",
        "nginx: 198.51.100.%d GET /index-%d.html 200",
        "kernel: iptables DROP SRC=192.0.2.%d DPT=2%d",
    };

    std::string events_text;
    nlohmann::json responses = nlohmann::json::object();
    std::string gold_text;
    for (int i = 0; i < n_events; ++i) {
        char raw[160];
        std::snprintf(raw, sizeof(raw), patterns[i % patterns.size()].c_str(), 1000 + i, i);
        loggraph::pipeline::LogEvent event;
        event.raw = raw;
        event.session_key = "sess-" + std::to_string(i / session_size);
        event.received_at =
            *loggraph::util::parse_datetime("2022-01-21T03:00:00Z") + i * 1000000LL;
        fixture.events.push_back(event);

        nlohmann::json line{{"raw", event.raw},
                            {"session_key", *event.session_key},
                            {"received_at", loggraph::util::format_datetime(event.received_at)}};
        events_text += line.dump() + "\n";

        auto graph = derive_graph_for(event.raw, i);
        const std::string key = loggraph::llm::StubBackend::key_for(
            loggraph::llm::render_event_message(event.raw, std::nullopt));
        responses[key] = loggraph::kg::serialize_graph(graph);

        nlohmann::json gold{{"event",
                             {{"raw", event.raw},
                              {"session_key", *event.session_key},
                              {"received_at",
                               loggraph::util::format_datetime(event.received_at)}}},
                            {"gold_graph", loggraph::kg::graph_to_json(graph)}};
        gold_text += gold.dump() + "\n";
    }
    loggraph::util::write_file(fixture.events_path, events_text);
    loggraph::util::write_file(fixture.stub_path,
                               nlohmann::json{{"responses", responses}}.dump(2));
    loggraph::util::write_file(fixture.gold_path, gold_text);
    return fixture;
}

// Renames every node id with a random permutation tag; graph isomorphism
// preserved by construction.
inline loggraph::kg::KnowledgeGraph relabel_ids(const loggraph::kg::KnowledgeGraph& g,
                                                std::mt19937_64& rng) {
    std::vector<std::string> fresh;
    for (size_t i = 0; i < g.nodes.size(); ++i) fresh.push_back("r" + std::to_string(i));
    std::shuffle(fresh.begin(), fresh.end(), rng);
    std::map<std::string, std::string> mapping;
    loggraph::kg::KnowledgeGraph out = g;
    for (size_t i = 0; i < out.nodes.size(); ++i) {
        mapping[out.nodes[i].id] = fresh[i];
        out.nodes[i].id = fresh[i];
    }
    for (auto& rel : out.relationships) {
        if (auto it = mapping.find(rel.source_id); it != mapping.end()) rel.source_id = it->second;
        if (auto it = mapping.find(rel.target_id); it != mapping.end()) rel.target_id = it->second;
    }
    return out;
}

}  // namespace helpers
