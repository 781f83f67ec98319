#pragma once
// Local-search retrieval: entity selection by embedding similarity, the
// hierarchical relation ranking (in-network before out-network, then
// endpoint-degree sum), community ranking by selected-entity coverage,
// source-chunk ranking by citation count, and token-budgeted context
// packing with per-section proportions.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "embedding.hpp"
#include "graph.hpp"

namespace graglab {

struct RetrievalConfig {
    std::size_t top_k_entities = 5;
    std::size_t top_k_relations = 5;
    double text_unit_prop = 0.5;
    double community_prop = 0.1;
    std::size_t max_context_tokens = 3000;  // 0 keeps every section empty

    void validate() const {
        if (top_k_entities == 0) throw ConfigError("top_k_entities must be positive");
        if (text_unit_prop < 0 || community_prop < 0 || text_unit_prop + community_prop > 1.0)
            throw ConfigError("context proportions must be nonnegative and sum to at most 1");
    }
};

// Precomputed entity embeddings (name + merged description).
struct EntityIndex {
    std::vector<Embedding> embeddings;  // parallel to graph.entities

    static EntityIndex build(const KnowledgeGraph& g, Embedder& embedder) {
        EntityIndex idx;
        idx.embeddings.reserve(g.entities.size());
        for (const auto& e : g.entities)
            idx.embeddings.push_back(embedder.embed(e.name + " " + e.description));
        return idx;
    }
};

// Top-k entity indices by cosine similarity; ties resolve to the smaller
// entity name so selection is total-ordered.
inline std::vector<std::size_t> select_entities(const KnowledgeGraph& g, const EntityIndex& idx,
                                                const Embedding& query, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(g.entities.size());
    for (std::size_t i = 0; i < g.entities.size(); ++i)
        scored.emplace_back(cosine(query, idx.embeddings[i]), i);
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return g.entities[a.second].name < g.entities[b.second].name;
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
    return out;
}

// Relations incident to the selected entities. In-network relations (both
// endpoints selected) rank before out-network ones; within each band the
// endpoint-degree sum decides, larger first; remaining ties go to the
// lexicographically smaller (source, target, label).
inline std::vector<const Relation*> rank_relations(const KnowledgeGraph& g,
                                                   const std::set<std::string>& selected) {
    std::map<std::string, std::size_t> degree;
    for (const auto& r : g.relations) {
        ++degree[r.source];
        ++degree[r.target];
    }
    struct Row {
        int band;
        std::size_t degree_sum;
        const Relation* rel;
    };
    std::vector<Row> rows;
    for (const auto& r : g.relations) {
        bool s = selected.count(r.source) != 0, t = selected.count(r.target) != 0;
        if (!s && !t) continue;
        rows.push_back({s && t ? 0 : 1, degree[r.source] + degree[r.target], &r});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.band != b.band) return a.band < b.band;
        if (a.degree_sum != b.degree_sum) return a.degree_sum > b.degree_sum;
        return a.rel->key() < b.rel->key();
    });
    std::vector<const Relation*> out;
    for (const auto& row : rows) out.push_back(row.rel);
    return out;
}

// Communities ranked by how many selected entities they cover, larger first;
// finer levels before coarser; then smaller id.
inline std::vector<const Community*> rank_communities(const KnowledgeGraph& g,
                                                      const std::set<std::string>& selected) {
    struct Row {
        std::size_t coverage;
        const Community* com;
    };
    std::vector<Row> rows;
    for (const auto& c : g.communities) {
        std::size_t cov = 0;
        for (const auto& name : c.entities) cov += selected.count(name);
        if (cov > 0) rows.push_back({cov, &c});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.coverage != b.coverage) return a.coverage > b.coverage;
        if (a.com->level != b.com->level) return a.com->level < b.com->level;
        return a.com->id < b.com->id;
    });
    std::vector<const Community*> out;
    for (const auto& row : rows) out.push_back(row.com);
    return out;
}

// Source chunks ranked by how many of the given relations cite them, larger
// first; then smaller chunk id.
inline std::vector<const TextChunk*> rank_chunks(const KnowledgeGraph& g,
                                                 const std::vector<const Relation*>& relations) {
    std::map<std::string, std::size_t> citations;
    for (const Relation* r : relations)
        for (const auto& id : r->chunk_ids) ++citations[id];
    struct Row {
        std::size_t citations;
        const TextChunk* chunk;
    };
    std::vector<Row> rows;
    for (const auto& c : g.chunks) {
        auto it = citations.find(c.id);
        if (it != citations.end()) rows.push_back({it->second, &c});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.citations != b.citations) return a.citations > b.citations;
        return a.chunk->id < b.chunk->id;
    });
    std::vector<const TextChunk*> out;
    for (const auto& row : rows) out.push_back(row.chunk);
    return out;
}

struct RetrievedContext {
    const KnowledgeGraph* graph = nullptr;
    std::vector<const Entity*> entities;
    std::vector<const Relation*> relations;
    std::vector<const Community*> communities;
    std::vector<const TextChunk*> chunks;
    std::string text;
    std::size_t tokens = 0;
};

// Assemble the context window. Communities get community_prop of the budget,
// source chunks text_unit_prop, entities and relations share the remainder.
// Items are admitted in rank order while they fit their section budget.
inline RetrievedContext build_context(const KnowledgeGraph& g, const EntityIndex& idx,
                                      Embedder& embedder, std::string_view question,
                                      const RetrievalConfig& cfg = {}) {
    cfg.validate();
    RetrievedContext ctx;
    ctx.graph = &g;

    Embedding query = embedder.embed(question);
    std::vector<std::size_t> picked = select_entities(g, idx, query, cfg.top_k_entities);
    std::set<std::string> selected;
    for (std::size_t i : picked) {
        ctx.entities.push_back(&g.entities[i]);
        selected.insert(g.entities[i].name);
    }

    std::vector<const Relation*> rels = rank_relations(g, selected);
    if (rels.size() > cfg.top_k_relations) rels.resize(cfg.top_k_relations);
    std::vector<const Community*> coms = rank_communities(g, selected);
    std::vector<const TextChunk*> chs = rank_chunks(g, rels);

    const std::size_t community_budget =
        static_cast<std::size_t>(cfg.community_prop * static_cast<double>(cfg.max_context_tokens));
    const std::size_t chunk_budget =
        static_cast<std::size_t>(cfg.text_unit_prop * static_cast<double>(cfg.max_context_tokens));
    const std::size_t graph_budget = cfg.max_context_tokens - community_budget - chunk_budget;

    std::string text;
    std::size_t used_total = 0;
    auto admit = [&](const std::string& line, std::size_t& used, std::size_t budget) {
        std::size_t n = count_tokens(line);
        if (used + n > budget || used_total + n > cfg.max_context_tokens) return false;
        used += n;
        used_total += n;
        text += line;
        text += '\n';
        return true;
    };

    std::size_t used = 0;
    text += "-----Reports-----\n";
    for (const Community* c : coms)
        if (admit(c->summary, used, community_budget)) ctx.communities.push_back(c);

    used = 0;
    text += "-----Entities-----\n";
    for (const Entity* e : ctx.entities)
        admit(e->name + ": " + e->description, used, graph_budget);
    text += "-----Relationships-----\n";
    std::vector<const Relation*> kept;
    for (const Relation* r : rels)
        if (admit(r->source + " -> " + r->target + ": " + r->description, used, graph_budget))
            kept.push_back(r);
    ctx.relations = std::move(kept);

    used = 0;
    text += "-----Sources-----\n";
    for (const TextChunk* c : chs)
        if (admit(c->text, used, chunk_budget)) ctx.chunks.push_back(c);

    ctx.text = std::move(text);
    ctx.tokens = used_total;
    return ctx;
}

}  // namespace graglab
