#pragma once
// Poisoning pipeline: per-query relation inference, greedy set cover over
// relation-dependent queries, competing-entity choice, covering-narrative
// injection texts (temporal ordering, explicit negation, contextual
// explanation, entity-selection tricks), relation enhancement, poison
// assembly, the declarative per-query baseline, and plan persistence.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "domain.hpp"
#include "graph.hpp"
#include "record_io.hpp"
#include "rng.hpp"
#include "text.hpp"

namespace graglab {

// ---------------------------------------------------------------------------
// Relation inference: which relations must flip for a query's answer to flip.

class PathInferencer {
public:
    virtual ~PathInferencer() = default;
    // Hops in order; object may be "?" when the knowledge graph is unknown.
    virtual std::vector<Triple> infer(const Query& query) = 0;
};

// Knowledge-graph-aware inference: walk the indexed graph along the
// question's registered label chain, one forward candidate per hop.
class GraphPathInferencer : public PathInferencer {
public:
    GraphPathInferencer(const KnowledgeGraph& graph, Domain domain)
        : g_(graph), sch_(schema(domain)) {}

    std::vector<Triple> infer(const Query& query) override {
        std::optional<ParsedQuestion> pq = parse_question(sch_, query.text);
        if (!pq) throw ConfigError("query " + query.id + ": unrecognized question form");
        std::vector<Triple> path;
        std::string cur = pq->anchor;
        for (const auto& label : pq->pattern->type_ids) {
            std::vector<const Relation*> cands = g_.relations_from(cur, label);
            std::erase_if(cands, [](const Relation* r) { return r->asserts_absence; });
            if (cands.empty())
                throw ConfigError("query " + query.id + ": graph path breaks at " + cur);
            const Relation* pick = *std::min_element(
                cands.begin(), cands.end(),
                [](const Relation* a, const Relation* b) { return a->target < b->target; });
            path.push_back({pick->source, pick->label, pick->target});
            cur = pick->target;
        }
        return path;
    }

private:
    const KnowledgeGraph& g_;
    const DomainSchema& sch_;
};

// Knowledge-graph-agnostic inference: the label chain comes from the
// question pattern alone; objects past the anchor are unknown wildcards.
class AgnosticPathInferencer : public PathInferencer {
public:
    explicit AgnosticPathInferencer(Domain domain) : sch_(schema(domain)) {}

    std::vector<Triple> infer(const Query& query) override {
        std::optional<ParsedQuestion> pq = parse_question(sch_, query.text);
        if (!pq) throw ConfigError("query " + query.id + ": unrecognized question form");
        std::vector<Triple> path;
        std::string cur = pq->anchor;
        for (const auto& label : pq->pattern->type_ids) {
            path.push_back({cur, label, "?"});
            cur = "?";
        }
        return path;
    }

private:
    const DomainSchema& sch_;
};

// Inference over a text-completion provider. The prompt template receives
// the question; the reply must carry one "subject|label|object" per line.
class LlmPathInferencer : public PathInferencer {
public:
    LlmPathInferencer(std::function<std::string(const std::string&)> complete,
                      std::string prompt_template)
        : complete_(std::move(complete)), prompt_(std::move(prompt_template)) {}

    std::vector<Triple> infer(const Query& query) override {
        std::string prompt = prompt_;
        std::size_t pos = prompt.find("{question}");
        if (pos != std::string::npos) prompt.replace(pos, 10, query.text);
        std::string reply = complete_(prompt);
        std::vector<Triple> path;
        for (const auto& raw : split_lines(reply)) {
            std::string line = trim(raw);
            if (line.empty()) continue;
            std::size_t a = line.find('|');
            std::size_t b = a == std::string::npos ? a : line.find('|', a + 1);
            if (b == std::string::npos) continue;
            path.push_back({canonical_name(line.substr(0, a)),
                            to_lower(trim(line.substr(a + 1, b - a - 1))),
                            canonical_name(line.substr(b + 1))});
        }
        if (path.empty()) throw ConfigError("query " + query.id + ": provider returned no path");
        return path;
    }

private:
    static std::vector<std::string> split_lines(std::string_view s) {
        std::vector<std::string> out;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            std::size_t nl = s.find('\n', pos);
            out.emplace_back(s.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        return out;
    }

    std::function<std::string(const std::string&)> complete_;
    std::string prompt_;
};

// ---------------------------------------------------------------------------
// Greedy set cover

// Generic greedy cover: pick the set covering the most uncovered elements,
// ties to the smallest set index, until everything coverable is covered.
// Returns chosen set indices in pick order.
inline std::vector<std::size_t> greedy_cover(std::size_t n_elements,
                                             const std::vector<std::vector<std::size_t>>& sets) {
    std::vector<bool> covered(n_elements, false);
    std::size_t remaining = n_elements;
    std::vector<std::size_t> picks;
    while (remaining > 0) {
        std::size_t best = sets.size(), best_gain = 0;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            std::size_t gain = 0;
            for (std::size_t e : sets[i])
                if (e < n_elements && !covered[e]) ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        if (best == sets.size()) break;  // nothing else coverable
        picks.push_back(best);
        for (std::size_t e : sets[best])
            if (e < n_elements && !covered[e]) {
                covered[e] = true;
                --remaining;
            }
    }
    return picks;
}

struct CoverEntry {
    Triple relation;                     // object may be "?" in agnostic mode
    std::vector<std::string> query_ids;  // queries this pick covers
};

// Cover the query set with as few relations as possible. Relations are
// keyed by (subject, label) so agnostic wildcards unify with concrete hops;
// ties prefer the lexicographically smaller key.
inline std::vector<CoverEntry> cover_queries(const std::vector<Query>& queries,
                                             const std::vector<std::vector<Triple>>& paths) {
    if (queries.size() != paths.size())
        throw ConfigError("cover_queries: one inferred path per query required");
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_key;
    std::map<std::pair<std::string, std::string>, std::string> object_of;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        for (const auto& hop : paths[qi]) {
            auto key = std::make_pair(hop.subject, hop.type_id);
            auto& members = by_key[key];
            if (members.empty() || members.back() != qi) members.push_back(qi);
            if (hop.object != "?" && object_of[key].empty()) object_of[key] = hop.object;
        }
    }
    std::vector<std::pair<std::string, std::string>> keys;  // sorted: tie-break order
    std::vector<std::vector<std::size_t>> sets;
    for (const auto& [key, members] : by_key) {
        keys.push_back(key);
        sets.push_back(members);
    }
    std::vector<CoverEntry> out;
    std::set<std::size_t> covered;
    for (std::size_t si : greedy_cover(queries.size(), sets)) {
        CoverEntry e;
        const auto& key = keys[si];
        std::string obj = object_of[key].empty() ? "?" : object_of[key];
        e.relation = {key.first, key.second, obj};
        for (std::size_t qi : sets[si])
            if (covered.insert(qi).second) e.query_ids.push_back(queries[qi].id);
        out.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Injection crafting

struct TrickConfig {
    bool temporal = true;          // date-stamped narrative head
    bool negation = true;          // explicit negation of the clean relation
    bool explanation = true;       // trailing change-reason sentence
    bool entity_selection = true;  // replacement name overlaps the original
    bool shuffle = true;           // seeded permutation of poison documents
};

struct AttackConfig {
    TrickConfig tricks;
    int n_alpha = 3;  // narrative replicas per injected relation
    int n_beta = 5;   // enhancement supports per injected entity
    std::size_t max_tokens_per_text = 30;
    Date attack_date{2024, 10, 19};
    std::uint64_t seed = 1;
};

// Replacement entity for relation (u, label, v). With the entity-selection
// trick the name shares tokens with v (retrieval-similar); otherwise it is
// an unrelated pool name. Never collides with an existing entity.
inline std::string choose_competing_entity(const Triple& relation, const std::set<std::string>& existing,
                                           bool entity_selection_trick, std::uint64_t seed) {
    if (entity_selection_trick && relation.object != "?") {
        std::string base = "New " + relation.object;
        std::string name = canonical_name(base);
        for (int i = 2; existing.count(name); ++i)
            name = canonical_name(base + " " + std::to_string(i));
        return name;
    }
    for (std::size_t i = 0;; ++i) {
        std::string name = canonical_name(pool_name(seed ^ 0xadd5eedull, "generic", i));
        if (!existing.count(name)) return name;
    }
}

namespace detail {

inline void check_budget(const std::string& text, std::size_t max_tokens) {
    if (count_tokens(text) > max_tokens)
        throw ConfigError("poison text exceeds " + std::to_string(max_tokens) +
                          " tokens: " + text);
}

}  // namespace detail

// Covering-narrative texts for replacing (u, label, v) with (u, label, v*).
inline std::vector<std::string> craft_injection_texts(const DomainSchema& sch, const Triple& relation,
                                                      const std::string& v_star,
                                                      const TrickConfig& tricks,
                                                      const AttackConfig& cfg) {
    const RelationType& type = sch.type(relation.type_id);
    std::string pos = fill_ab(type.tmpl, relation.subject, v_star);
    std::string neg = relation.object == "?"
                          ? std::string()
                          : fill_ab(type.neg_tmpl, relation.subject, relation.object);
    bool negation = tricks.negation && !neg.empty();

    std::vector<std::string> out;
    const auto& heads = narrative_heads();
    for (int i = 0; i < cfg.n_alpha; ++i) {
        std::string text;
        std::string head = tricks.temporal
                               ? detail::fill(heads[static_cast<std::size_t>(i) % heads.size()],
                                              "D", cfg.attack_date.str())
                               : std::string();
        if (negation) {
            std::string body = neg + " anymore; instead, " + pos + ".";
            text = head.empty() ? capitalize(body) : capitalize(head) + body;
        } else {
            text = head.empty() ? capitalize(pos) + "." : capitalize(head) + pos + ".";
        }
        if (tricks.explanation)
            text += " " + capitalize(std::string(kChangeReasonPrefix)) + "the update of " +
                    relation.subject + ".";
        detail::check_budget(text, cfg.max_tokens_per_text);
        out.push_back(std::move(text));
    }
    return out;
}

// Enhancement texts raising the credibility (degree) of v*. Each support
// carries the label the covered queries need next after the injected hop,
// or the generic association type when the injected hop is terminal, and a
// trailing clause re-asserting (u, label, v*).
inline std::vector<std::string> craft_enhancement_texts(
    const DomainSchema& sch, const Triple& relation, const std::string& v_star,
    const std::vector<std::string>& support_labels, const std::vector<std::string>& support_names,
    const AttackConfig& cfg) {
    if (support_labels.size() != support_names.size())
        throw ConfigError("craft_enhancement_texts: one label per support name required");
    const RelationType& first = sch.type(relation.type_id);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < support_names.size(); ++i) {
        const RelationType& t = sch.type(support_labels[i]);
        const std::string& enh = t.enh_tmpl.empty() ? sch.type("assoc").enh_tmpl : t.enh_tmpl;
        std::string text = capitalize(fill_sv(enh, support_names[i], v_star));
        if (!first.which_tmpl.empty())
            text += ", " + detail::fill(first.which_tmpl, "A", relation.subject);
        text += ".";
        detail::check_budget(text, cfg.max_tokens_per_text);
        out.push_back(std::move(text));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Attack plans

struct InjectedRelation {
    Triple original;       // (u, label, v); v may be "?" in agnostic mode
    std::string v_star;    // replacement entity
    std::vector<std::string> covered_query_ids;
    std::vector<std::string> narrative_texts;
    std::vector<std::string> enhancement_texts;
};

struct AttackPlan {
    std::string method;  // "gragpoison" or "poisonedrag"
    std::vector<InjectedRelation> relations;
    std::vector<Document> poison_documents;

    std::size_t total_texts() const {
        std::size_t n = 0;
        for (const auto& r : relations)
            n += r.narrative_texts.size() + r.enhancement_texts.size();
        return n;
    }
    std::size_t covered_queries() const {
        std::size_t n = 0;
        for (const auto& r : relations) n += r.covered_query_ids.size();
        return n;
    }
};

// Build the GRAGPoison plan: infer relation dependencies, cover the query
// set, then craft narrative and enhancement texts per selected relation.
inline AttackPlan build_attack_plan(const std::vector<Query>& queries, PathInferencer& inferencer,
                                    const DomainSchema& sch, const std::set<std::string>& existing,
                                    const AttackConfig& cfg = {}) {
    std::vector<std::vector<Triple>> paths;
    paths.reserve(queries.size());
    for (const auto& q : queries) paths.push_back(inferencer.infer(q));

    std::map<std::string, const std::vector<Triple>*> path_of;
    for (std::size_t i = 0; i < queries.size(); ++i) path_of[queries[i].id] = &paths[i];

    AttackPlan plan;
    plan.method = "gragpoison";
    std::set<std::string> taken = existing;
    std::size_t support_counter = 0;
    for (const auto& entry : cover_queries(queries, paths)) {
        InjectedRelation inj;
        inj.original = entry.relation;
        inj.covered_query_ids = entry.query_ids;
        inj.v_star = choose_competing_entity(entry.relation, taken, cfg.tricks.entity_selection,
                                             cfg.seed);
        taken.insert(inj.v_star);
        inj.narrative_texts = craft_injection_texts(sch, entry.relation, inj.v_star, cfg.tricks, cfg);

        // Follow-on labels the covered queries need from v*, round-robin.
        std::vector<std::string> follow;
        for (const auto& qid : entry.query_ids) {
            const std::vector<Triple>& path = *path_of.at(qid);
            std::string label = "assoc";
            for (std::size_t h = 0; h < path.size(); ++h) {
                if (path[h].subject == entry.relation.subject &&
                    path[h].type_id == entry.relation.type_id) {
                    if (h + 1 < path.size()) label = path[h + 1].type_id;
                    break;
                }
            }
            follow.push_back(label);
        }
        std::vector<std::string> labels, names;
        for (int i = 0; i < cfg.n_beta; ++i) {
            labels.push_back(follow.empty() ? "assoc" : follow[static_cast<std::size_t>(i) % follow.size()]);
            std::string name;
            do {
                name = canonical_name(pool_name(cfg.seed, "support", support_counter++));
            } while (taken.count(name));
            taken.insert(name);
            names.push_back(name);
        }
        inj.enhancement_texts = craft_enhancement_texts(sch, entry.relation, inj.v_star, labels,
                                                        names, cfg);
        plan.relations.push_back(std::move(inj));
    }

    std::size_t doc_idx = 0;
    for (const auto& inj : plan.relations) {
        for (const auto& t : inj.narrative_texts)
            plan.poison_documents.push_back({"poison-" + std::to_string(doc_idx++), t, "poison", std::nullopt});
        for (const auto& t : inj.enhancement_texts)
            plan.poison_documents.push_back({"poison-" + std::to_string(doc_idx++), t, "poison", std::nullopt});
    }
    if (cfg.tricks.shuffle) {
        Rng rng(cfg.seed ^ 0x5f5f5f5full);
        rng.shuffle(plan.poison_documents);
    }
    return plan;
}

// Declarative per-query baseline: five texts per query, each the question
// followed by a direct assertion that the terminal relation points at a
// fabricated answer. The assertion clause is truncated to the token budget
// if needed; the question itself never is.
inline AttackPlan poisonedrag_baseline(const std::vector<Query>& queries, const DomainSchema& sch,
                                       const std::set<std::string>& existing, int texts_per_query = 5,
                                       std::size_t max_tokens_per_text = 30,
                                       std::uint64_t seed = 1) {
    AttackPlan plan;
    plan.method = "poisonedrag";
    std::set<std::string> taken = existing;
    std::size_t doc_idx = 0, fake_idx = 0;
    for (const auto& q : queries) {
        std::optional<ParsedQuestion> pq = parse_question(sch, q.text);
        if (!pq) throw ConfigError("query " + q.id + ": unrecognized question form");
        if (count_tokens(q.text) >= max_tokens_per_text)
            throw ConfigError("query " + q.id + ": question alone exceeds the text budget");
        const RelationType& terminal = sch.type(pq->pattern->type_ids.back());
        std::string fake;
        do {
            fake = canonical_name(pool_name(seed ^ 0xfacadeull, "generic", fake_idx++));
        } while (taken.count(fake));
        taken.insert(fake);

        InjectedRelation inj;
        inj.original = {pq->anchor, terminal.id, "?"};
        inj.v_star = fake;
        inj.covered_query_ids = {q.id};
        std::string assertion = capitalize(fill_ab(terminal.tmpl, pq->anchor, fake)) + ".";
        std::size_t remaining = max_tokens_per_text - count_tokens(q.text);
        if (count_tokens(assertion) > remaining)
            assertion = truncate_tokens(assertion, remaining);
        std::string text = q.text + " " + assertion;
        for (int i = 0; i < texts_per_query; ++i) {
            inj.narrative_texts.push_back(text);
            plan.poison_documents.push_back({"poison-" + std::to_string(doc_idx++), text, "poison", std::nullopt});
        }
        plan.relations.push_back(std::move(inj));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Plan persistence

inline void save_plan(const std::string& path, const AttackPlan& plan) {
    std::vector<Record> recs;
    {
        Record r;
        r.kind = "plan";
        r.set("method", plan.method);
        recs.push_back(std::move(r));
    }
    for (const auto& inj : plan.relations) {
        Record r;
        r.kind = "injection";
        r.set("subject", inj.original.subject);
        r.set("label", inj.original.type_id);
        r.set("object", inj.original.object);
        r.set("v_star", inj.v_star);
        std::string qs;
        for (const auto& q : inj.covered_query_ids) {
            if (!qs.empty()) qs += ',';
            qs += q;
        }
        r.set("queries", qs);
        r.set("narratives", static_cast<long long>(inj.narrative_texts.size()));
        r.set("enhancements", static_cast<long long>(inj.enhancement_texts.size()));
        recs.push_back(std::move(r));
        for (const auto& t : inj.narrative_texts) {
            Record tr;
            tr.kind = "narrative";
            tr.set("text", t);
            recs.push_back(std::move(tr));
        }
        for (const auto& t : inj.enhancement_texts) {
            Record tr;
            tr.kind = "enhancement";
            tr.set("text", t);
            recs.push_back(std::move(tr));
        }
    }
    for (const auto& d : plan.poison_documents) {
        Record r;
        r.kind = "document";
        r.set("id", d.id);
        r.set("text", d.text);
        recs.push_back(std::move(r));
    }
    write_records(path, recs);
}

inline AttackPlan load_plan(const std::string& path) {
    AttackPlan plan;
    InjectedRelation* cur = nullptr;
    long long want_narr = 0, want_enh = 0;
    std::size_t line_no = 0;
    for (const auto& rec : read_records(path)) {
        ++line_no;
        try {
            if (rec.kind == "plan") {
                plan.method = rec.get("method");
            } else if (rec.kind == "injection") {
                InjectedRelation inj;
                inj.original = {rec.get("subject"), rec.get("label"), rec.get("object")};
                inj.v_star = rec.get("v_star");
                std::string qs = rec.get("queries");
                std::size_t pos = 0;
                while (pos < qs.size()) {
                    std::size_t comma = qs.find(',', pos);
                    inj.covered_query_ids.push_back(
                        qs.substr(pos, comma == std::string::npos ? comma : comma - pos));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
                want_narr = rec.get_int("narratives");
                want_enh = rec.get_int("enhancements");
                plan.relations.push_back(std::move(inj));
                cur = &plan.relations.back();
            } else if (rec.kind == "narrative" || rec.kind == "enhancement") {
                if (!cur) throw std::runtime_error("text record before any injection");
                auto& dst = rec.kind == "narrative" ? cur->narrative_texts : cur->enhancement_texts;
                dst.push_back(rec.get("text"));
            } else if (rec.kind == "document") {
                plan.poison_documents.push_back({rec.get("id"), rec.get("text"), "poison", std::nullopt});
            } else {
                throw std::runtime_error("unknown record kind '" + rec.kind + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    for (const auto& inj : plan.relations) {
        (void)want_narr;
        (void)want_enh;
        if (inj.covered_query_ids.empty())
            throw ConfigError("plan injection for " + inj.original.subject + " covers no queries");
    }
    return plan;
}

}  // namespace graglab
