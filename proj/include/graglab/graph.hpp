#pragma once
// Knowledge-graph indexing: token-window chunking, graph assembly from
// extraction fragments (canonical-name entity merge, relation merge with
// negation / temporal-marker carry-over), two-level seeded label-propagation
// communities with deterministic summaries, and the on-disk graph format.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "corpus.hpp"
#include "extraction.hpp"
#include "record_io.hpp"
#include "rng.hpp"
#include "text.hpp"

namespace graglab {

// ---------------------------------------------------------------------------
// Chunking

struct TextChunk {
    std::string id;       // "<doc_id>#<index>"
    std::string doc_id;
    int index = 0;
    std::string text;
    std::string source_tag;
    std::optional<int> trust;
    std::size_t n_tokens = 0;
};

struct ChunkConfig {
    std::size_t chunk_size = 1200;    // tokens per chunk
    std::size_t chunk_overlap = 100;  // tokens shared between neighbours

    void validate() const {
        if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
        if (chunk_overlap >= chunk_size)
            throw ConfigError("chunk_overlap must be smaller than chunk_size");
    }
};

inline std::vector<TextChunk> chunk_documents(const std::vector<Document>& documents,
                                              const ChunkConfig& cfg = {}) {
    cfg.validate();
    const std::size_t stride = cfg.chunk_size - cfg.chunk_overlap;
    std::vector<TextChunk> chunks;
    for (const auto& doc : documents) {
        doc.validate();
        // Character span of every token, so chunk boundaries stay on tokens.
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        bool in_word = false;
        for (std::size_t i = 0; i < doc.text.size(); ++i) {
            bool w = is_word_char(doc.text[i]);
            if (w && !in_word) spans.emplace_back(i, i + 1);
            if (w) spans.back().second = i + 1;
            in_word = w;
        }
        if (spans.empty()) continue;
        int index = 0;
        for (std::size_t start = 0; start < spans.size(); start += stride, ++index) {
            std::size_t stop = std::min(start + cfg.chunk_size, spans.size());
            std::size_t lo = spans[start].first;
            // Extend to the end of the document after the last token so the
            // final chunk keeps its trailing punctuation.
            std::size_t hi = stop == spans.size() ? doc.text.size() : spans[stop - 1].second;
            TextChunk c;
            c.doc_id = doc.id;
            c.index = index;
            c.id = doc.id + "#" + std::to_string(index);
            c.text = doc.text.substr(lo, hi - lo);
            c.source_tag = doc.source_tag;
            c.trust = doc.trust;
            c.n_tokens = stop - start;
            chunks.push_back(std::move(c));
            if (stop == spans.size()) break;
        }
    }
    return chunks;
}

// ---------------------------------------------------------------------------
// Graph model

struct Entity {
    std::string name;        // canonical, unique
    std::string type_label;  // may be empty
    std::string description; // deduplicated source sentences
};

struct Relation {
    std::string source;  // canonical entity name
    std::string target;
    std::string label;   // relation type id
    std::string description;            // deduplicated source sentences
    int weight = 0;                     // number of supporting mentions
    std::vector<std::string> chunk_ids; // provenance, insertion order
    std::optional<Date> temporal;       // latest temporal marker seen
    bool asserts_absence = false;       // every mention negated the relation
    std::string negates;                // object of the relation this one supersedes

    auto key() const { return std::tie(source, target, label); }
};

struct Community {
    int id = 0;
    int level = 0;
    int parent = -1;  // id of the containing level+1 community, -1 at the top
    std::vector<std::string> entities;  // sorted canonical names
    std::string summary;
};

struct KnowledgeGraph {
    std::vector<TextChunk> chunks;
    std::vector<Entity> entities;    // sorted by name
    std::vector<Relation> relations; // sorted by (source, target, label)
    std::vector<Community> communities;

    const Entity* find_entity(std::string_view name) const {
        auto it = std::lower_bound(entities.begin(), entities.end(), name,
                                   [](const Entity& e, std::string_view n) { return e.name < n; });
        return it != entities.end() && it->name == name ? &*it : nullptr;
    }

    const TextChunk* find_chunk(std::string_view id) const {
        for (const auto& c : chunks)
            if (c.id == id) return &c;
        return nullptr;
    }

    std::vector<const Relation*> relations_of(std::string_view name) const {
        std::vector<const Relation*> out;
        for (const auto& r : relations)
            if (r.source == name || r.target == name) out.push_back(&r);
        return out;
    }

    std::vector<const Relation*> relations_from(std::string_view subject,
                                                std::string_view label) const {
        std::vector<const Relation*> out;
        for (const auto& r : relations)
            if (r.source == subject && r.label == label) out.push_back(&r);
        return out;
    }

    // Incident relation count (absence assertions included).
    std::size_t degree(std::string_view name) const {
        std::size_t d = 0;
        for (const auto& r : relations)
            if (r.source == name || r.target == name) ++d;
        return d;
    }
};

// ---------------------------------------------------------------------------
// Graph assembly

namespace detail {

inline void append_unique_sentence(std::string& description, std::set<std::string>& seen,
                                   const std::string& sentence) {
    std::string s = trim(sentence);
    if (s.empty() || !seen.insert(s).second) return;
    if (!description.empty()) description += ' ';
    description += s;
}

}  // namespace detail

inline KnowledgeGraph build_graph(std::vector<TextChunk> chunks, Extractor& extractor) {
    std::map<std::string, Entity> ents;
    std::map<std::string, std::set<std::string>> ent_seen;
    std::map<std::tuple<std::string, std::string, std::string>, Relation> rels;
    std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> rel_seen;
    std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> rel_chunks;
    std::map<std::tuple<std::string, std::string, std::string>, bool> rel_any_positive;

    for (const auto& chunk : chunks) {
        ExtractionFragment frag = extractor.extract(chunk.text);
        for (const auto& e : frag.entities) {
            Entity& ent = ents[e.name];
            ent.name = e.name;
            if (ent.type_label.empty()) ent.type_label = e.type_label;
            detail::append_unique_sentence(ent.description, ent_seen[e.name], e.description);
        }
        for (const auto& r : frag.relations) {
            auto key = std::make_tuple(r.subject, r.object, r.type_id);
            Relation& rel = rels[key];
            rel.source = r.subject;
            rel.target = r.object;
            rel.label = r.type_id;
            rel.weight += 1;
            detail::append_unique_sentence(rel.description, rel_seen[key], r.description);
            if (rel_chunks[key].insert(chunk.id).second) rel.chunk_ids.push_back(chunk.id);
            if (r.temporal_marker && (!rel.temporal || *rel.temporal < *r.temporal_marker))
                rel.temporal = r.temporal_marker;
            if (!r.negation) rel_any_positive[key] = true;
            if (!r.negated_object.empty() && rel.negates.empty()) rel.negates = r.negated_object;
        }
    }

    KnowledgeGraph g;
    g.chunks = std::move(chunks);
    for (auto& [name, ent] : ents) g.entities.push_back(std::move(ent));
    for (auto& [key, rel] : rels) {
        rel.asserts_absence = !rel_any_positive[key];
        g.relations.push_back(std::move(rel));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Communities: seeded synchronous-order label propagation, two levels.

namespace detail {

// One propagation pass over a weighted undirected graph given as an
// adjacency list; returns final labels (initially node index).
inline std::vector<std::size_t> propagate_labels(
    const std::vector<std::vector<std::pair<std::size_t, double>>>& adj, std::uint64_t seed) {
    std::size_t n = adj.size();
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) label[i] = i;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (int sweep = 0; sweep < 50; ++sweep) {
        rng.shuffle(order);
        bool changed = false;
        for (std::size_t node : order) {
            if (adj[node].empty()) continue;
            std::map<std::size_t, double> tally;
            for (auto [nb, w] : adj[node]) tally[label[nb]] += w;
            std::size_t best = label[node];
            double best_w = -1.0;
            for (auto [lab, w] : tally) {
                if (w > best_w) {  // ties resolve to the smallest label
                    best_w = w;
                    best = lab;
                }
            }
            if (best != label[node]) {
                label[node] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return label;
}

}  // namespace detail

inline void detect_communities(KnowledgeGraph& g, std::uint64_t seed = 7, int levels = 2) {
    g.communities.clear();
    if (g.entities.empty()) return;

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < g.entities.size(); ++i) index[g.entities[i].name] = i;

    // Level 0: entity graph.
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(g.entities.size());
    for (const auto& r : g.relations) {
        std::size_t a = index.at(r.source), b = index.at(r.target);
        if (a == b) continue;
        adj[a].emplace_back(b, static_cast<double>(r.weight));
        adj[b].emplace_back(a, static_cast<double>(r.weight));
    }
    std::vector<std::size_t> lab0 = detail::propagate_labels(adj, seed);

    // Group by label; community order follows the smallest member index.
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < lab0.size(); ++i) groups[lab0[i]].push_back(i);
    std::vector<std::vector<std::size_t>> level0;
    std::vector<int> node_comm(g.entities.size());
    {
        std::vector<std::pair<std::size_t, std::size_t>> ordered;  // (min member, label)
        for (const auto& [lab, members] : groups)
            ordered.emplace_back(*std::min_element(members.begin(), members.end()), lab);
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [mn, lab] : ordered) {
            for (std::size_t m : groups[lab]) node_comm[m] = static_cast<int>(level0.size());
            level0.push_back(groups[lab]);
        }
    }
    for (std::size_t c = 0; c < level0.size(); ++c) {
        Community com;
        com.id = static_cast<int>(c);
        com.level = 0;
        for (std::size_t m : level0[c]) com.entities.push_back(g.entities[m].name);
        std::sort(com.entities.begin(), com.entities.end());
        g.communities.push_back(std::move(com));
    }

    if (levels < 2 || level0.size() < 2) return;

    // Level 1: meta-graph over level-0 communities.
    std::vector<std::vector<std::pair<std::size_t, double>>> meta(level0.size());
    std::map<std::pair<std::size_t, std::size_t>, double> inter;
    for (const auto& r : g.relations) {
        std::size_t a = node_comm[index.at(r.source)], b = node_comm[index.at(r.target)];
        if (a == b) continue;
        inter[{std::min(a, b), std::max(a, b)}] += static_cast<double>(r.weight);
    }
    for (const auto& [edge, w] : inter) {
        meta[edge.first].emplace_back(edge.second, w);
        meta[edge.second].emplace_back(edge.first, w);
    }
    std::vector<std::size_t> lab1 = detail::propagate_labels(meta, seed + 1);

    std::map<std::size_t, std::vector<std::size_t>> groups1;
    for (std::size_t c = 0; c < lab1.size(); ++c) groups1[lab1[c]].push_back(c);
    std::vector<std::pair<std::size_t, std::size_t>> ordered1;
    for (const auto& [lab, members] : groups1)
        ordered1.emplace_back(*std::min_element(members.begin(), members.end()), lab);
    std::sort(ordered1.begin(), ordered1.end());
    int next_id = static_cast<int>(level0.size());
    for (const auto& [mn, lab] : ordered1) {
        Community com;
        com.id = next_id++;
        com.level = 1;
        for (std::size_t child : groups1[lab]) {
            g.communities[child].parent = com.id;
            for (const auto& name : g.communities[child].entities) com.entities.push_back(name);
        }
        std::sort(com.entities.begin(), com.entities.end());
        g.communities.push_back(std::move(com));
    }
}

// Deterministic community reports: member roster plus the heaviest internal
// relations. Reused verbatim in retrieval context packing.
inline void summarize_communities(KnowledgeGraph& g, std::size_t max_relations = 3) {
    for (auto& com : g.communities) {
        std::set<std::string> members(com.entities.begin(), com.entities.end());
        std::vector<const Relation*> internal;
        for (const auto& r : g.relations)
            if (members.count(r.source) && members.count(r.target)) internal.push_back(&r);
        std::stable_sort(internal.begin(), internal.end(), [](const Relation* a, const Relation* b) {
            if (a->weight != b->weight) return a->weight > b->weight;
            return a->key() < b->key();
        });
        std::string s = "Community " + std::to_string(com.id) + " (level " +
                        std::to_string(com.level) + ") covers";
        for (std::size_t i = 0; i < com.entities.size(); ++i)
            s += (i ? ", " : " ") + com.entities[i];
        s += ".";
        for (std::size_t i = 0; i < internal.size() && i < max_relations; ++i) {
            std::vector<std::string> first = split_sentences(internal[i]->description);
            if (!first.empty()) s += " " + first.front();
        }
        com.summary = s;
    }
}

// ---------------------------------------------------------------------------
// Persistence

inline void save_graph(const std::string& path, const KnowledgeGraph& g) {
    std::vector<Record> recs;
    for (const auto& c : g.chunks) {
        Record r;
        r.kind = "chunk";
        r.set("id", c.id);
        r.set("doc", c.doc_id);
        r.set("index", static_cast<long long>(c.index));
        r.set("source_tag", c.source_tag);
        if (c.trust) r.set("trust", static_cast<long long>(*c.trust));
        r.set("tokens", static_cast<long long>(c.n_tokens));
        r.set("text", c.text);
        recs.push_back(std::move(r));
    }
    for (const auto& e : g.entities) {
        Record r;
        r.kind = "entity";
        r.set("name", e.name);
        r.set("kind", e.type_label);
        r.set("description", e.description);
        recs.push_back(std::move(r));
    }
    for (const auto& rel : g.relations) {
        Record r;
        r.kind = "relation";
        r.set("source", rel.source);
        r.set("target", rel.target);
        r.set("label", rel.label);
        r.set("weight", static_cast<long long>(rel.weight));
        std::string chunks;
        for (const auto& id : rel.chunk_ids) {
            if (!chunks.empty()) chunks += ',';
            chunks += id;
        }
        r.set("chunks", chunks);
        if (rel.temporal) r.set("temporal", rel.temporal->str());
        if (rel.asserts_absence) r.set("absence", "1");
        if (!rel.negates.empty()) r.set("negates", rel.negates);
        r.set("description", rel.description);
        recs.push_back(std::move(r));
    }
    for (const auto& c : g.communities) {
        Record r;
        r.kind = "community";
        r.set("id", static_cast<long long>(c.id));
        r.set("level", static_cast<long long>(c.level));
        r.set("parent", static_cast<long long>(c.parent));
        std::string members;
        for (const auto& name : c.entities) {
            if (!members.empty()) members += '|';
            members += name;
        }
        r.set("entities", members);
        r.set("summary", c.summary);
        recs.push_back(std::move(r));
    }
    write_records(path, recs);
}

inline KnowledgeGraph load_graph(const std::string& path) {
    KnowledgeGraph g;
    std::size_t line_no = 0;
    for (const auto& rec : read_records(path)) {
        ++line_no;
        try {
            if (rec.kind == "chunk") {
                TextChunk c;
                c.id = rec.get("id");
                c.doc_id = rec.get("doc");
                c.index = static_cast<int>(rec.get_int("index"));
                c.source_tag = rec.get("source_tag");
                if (const std::string* t = rec.find("trust")) c.trust = std::stoi(*t);
                c.n_tokens = static_cast<std::size_t>(rec.get_int("tokens"));
                c.text = rec.get("text");
                g.chunks.push_back(std::move(c));
            } else if (rec.kind == "entity") {
                g.entities.push_back({rec.get("name"), rec.get("kind"), rec.get("description")});
            } else if (rec.kind == "relation") {
                Relation r;
                r.source = rec.get("source");
                r.target = rec.get("target");
                r.label = rec.get("label");
                r.weight = static_cast<int>(rec.get_int("weight"));
                std::string chunks = rec.get("chunks");
                std::size_t pos = 0;
                while (pos < chunks.size()) {
                    std::size_t comma = chunks.find(',', pos);
                    r.chunk_ids.push_back(chunks.substr(pos, comma == std::string::npos ? comma : comma - pos));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
                if (const std::string* t = rec.find("temporal")) {
                    auto d = Date::parse(*t);
                    if (!d) throw std::runtime_error("bad temporal marker '" + *t + "'");
                    r.temporal = d;
                }
                if (rec.find("absence")) r.asserts_absence = true;
                if (const std::string* n = rec.find("negates")) r.negates = *n;
                r.description = rec.get("description");
                g.relations.push_back(std::move(r));
            } else if (rec.kind == "community") {
                Community c;
                c.id = static_cast<int>(rec.get_int("id"));
                c.level = static_cast<int>(rec.get_int("level"));
                c.parent = static_cast<int>(rec.get_int("parent"));
                std::string members = rec.get("entities");
                std::size_t pos = 0;
                while (pos < members.size()) {
                    std::size_t bar = members.find('|', pos);
                    c.entities.push_back(members.substr(pos, bar == std::string::npos ? bar : bar - pos));
                    if (bar == std::string::npos) break;
                    pos = bar + 1;
                }
                c.summary = rec.get("summary");
                g.communities.push_back(std::move(c));
            } else {
                throw std::runtime_error("unknown record kind '" + rec.kind + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    std::sort(g.entities.begin(), g.entities.end(),
              [](const Entity& a, const Entity& b) { return a.name < b.name; });
    std::sort(g.relations.begin(), g.relations.end(),
              [](const Relation& a, const Relation& b) { return a.key() < b.key(); });
    return g;
}

}  // namespace graglab
