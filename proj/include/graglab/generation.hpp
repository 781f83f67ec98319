#pragma once
// Answer generation over a retrieved context. The provider contract is the
// Generator virtual; the deterministic implementation parses the question
// against the domain's registered patterns and walks the relation chain,
// choosing among competing relations by an explicit precedence order:
//
//   1. provenance trust (max over supporting chunks), only when enabled
//   2. superseding relations: carry both a negation link to a competing
//      object and a temporal marker; the competing object is dropped
//   3. plain relations (no negation link, no temporal marker)
//   4. incomplete challengers: negation link or temporal marker, not both
//   5. endpoint-degree sum, larger first
//   6. lexicographic target name; with a jitter seed, a seeded hash of the
//      target instead (exposes residual ties to the consistency defense)
//
// A traversal that dead-ends abstains unless the context holds a direct
// (anchor, terminal-label) shortcut relation.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "domain.hpp"
#include "retrieval.hpp"
#include "text.hpp"

namespace graglab {

struct GenerationPolicy {
    bool use_trust = false;          // provenance-aware generation (defense)
    bool reference_prior = false;    // cross-check against prior knowledge (defense)
    std::uint64_t jitter_seed = 0;   // 0: canonical tie-break
    const std::vector<Triple>* prior = nullptr;  // background triples for reference_prior
};

struct GenerationResult {
    std::string answer;              // canonical entity name, empty on abstain
    bool abstained = false;
    bool conflict_noted = false;     // prior-knowledge cross-check fired
    std::string response;            // rendered answer text
    std::vector<std::string> trace;  // one "subject -label-> object" per hop
};

class Generator {
public:
    virtual ~Generator() = default;
    virtual GenerationResult generate(std::string_view question, const RetrievedContext& ctx,
                                      const GenerationPolicy& policy) = 0;
};

inline const std::string kAbstainResponse =
    "The provided context does not contain enough information to answer this question.";

class RuleBasedGenerator : public Generator {
public:
    explicit RuleBasedGenerator(Domain domain) : sch_(schema(domain)) {}

    GenerationResult generate(std::string_view question, const RetrievedContext& ctx,
                              const GenerationPolicy& policy) override {
        GenerationResult res;
        std::optional<ParsedQuestion> pq = parse_question(sch_, question);
        if (!pq) return abstain(res);

        std::map<std::string, std::size_t> degree;
        for (const Relation* r : ctx.relations) {
            ++degree[r->source];
            ++degree[r->target];
        }

        const std::vector<std::string>& chain = pq->pattern->type_ids;
        std::string current = pq->anchor;
        for (std::size_t hop = 0; hop < chain.size(); ++hop) {
            const Relation* pick = choose(ctx, current, chain[hop], degree, policy);
            if (!pick) {
                // Direct shortcut from the anchor on the terminal label.
                if (hop + 1 < chain.size() || chain.size() > 1) {
                    std::map<std::string, std::size_t> d2 = degree;
                    pick = choose(ctx, pq->anchor, chain.back(), d2, policy);
                    if (pick) {
                        res.trace.push_back(pick->source + " -" + pick->label + "-> " + pick->target);
                        current = pick->target;
                        break;
                    }
                }
                return abstain(res);
            }
            res.trace.push_back(pick->source + " -" + pick->label + "-> " + pick->target);
            current = pick->target;
        }

        res.answer = current;
        res.response = "Based on the provided context, the answer is " + current + ".";
        if (policy.reference_prior && policy.prior) {
            // Replay the chain over the prior triples; note a disagreement
            // without restating the prior answer.
            std::string p = pq->anchor;
            bool complete = true;
            for (const auto& label : chain) {
                const Triple* next = nullptr;
                for (const auto& t : *policy.prior)
                    if (t.subject == p && t.type_id == label && (!next || t.object < next->object))
                        next = &t;
                if (!next) {
                    complete = false;
                    break;
                }
                p = next->object;
            }
            if (complete && p != res.answer) {
                res.conflict_noted = true;
                res.response += " Note: this disagrees with previously recorded background knowledge.";
            }
        }
        return res;
    }

private:
    GenerationResult abstain(GenerationResult res) {
        res.abstained = true;
        res.response = kAbstainResponse;
        return res;
    }

    // Max trust over the chunks supporting a relation; unannotated chunks
    // count as the neutral midpoint.
    static int relation_trust(const RetrievedContext& ctx, const Relation* r) {
        int best = 0;
        for (const auto& id : r->chunk_ids) {
            const TextChunk* c = ctx.graph ? ctx.graph->find_chunk(id) : nullptr;
            int t = c && c->trust ? *c->trust : 3;
            if (t > best) best = t;
        }
        return best == 0 ? 3 : best;
    }

    const Relation* choose(const RetrievedContext& ctx, const std::string& subject,
                           const std::string& label, const std::map<std::string, std::size_t>& degree,
                           const GenerationPolicy& policy) {
        std::vector<const Relation*> cands;
        for (const Relation* r : ctx.relations)
            if (r->source == subject && r->label == label && !r->asserts_absence)
                cands.push_back(r);
        if (cands.empty()) return nullptr;

        // Objects explicitly superseded by a complete challenger are dropped.
        // Trust outranks supersession: with trust active, a challenger can
        // only invalidate relations it matches or exceeds in trust.
        std::map<std::string, int> target_trust;
        if (policy.use_trust)
            for (const Relation* r : cands) {
                int t = relation_trust(ctx, r);
                auto [it, fresh] = target_trust.emplace(r->target, t);
                if (!fresh && t > it->second) it->second = t;
            }
        std::set<std::string> invalidated;
        for (const Relation* r : cands)
            if (!r->negates.empty() && r->temporal) {
                if (policy.use_trust) {
                    auto it = target_trust.find(r->negates);
                    if (it != target_trust.end() && relation_trust(ctx, r) < it->second) continue;
                }
                invalidated.insert(r->negates);
            }
        std::vector<const Relation*> live;
        for (const Relation* r : cands)
            if (!invalidated.count(r->target)) live.push_back(r);
        if (live.empty()) live = cands;

        auto tier = [](const Relation* r) {
            bool neg = !r->negates.empty(), tmp = r->temporal.has_value();
            if (neg && tmp) return 0;
            if (!neg && !tmp) return 1;
            return 2;
        };
        auto deg = [&](const Relation* r) {
            auto ds = degree.find(r->source), dt = degree.find(r->target);
            return (ds == degree.end() ? 0 : ds->second) + (dt == degree.end() ? 0 : dt->second);
        };

        const Relation* best = nullptr;
        for (const Relation* r : live) {
            if (!best) {
                best = r;
                continue;
            }
            if (policy.use_trust) {
                int ta = relation_trust(ctx, r), tb = relation_trust(ctx, best);
                if (ta != tb) {
                    if (ta > tb) best = r;
                    continue;
                }
            }
            if (tier(r) != tier(best)) {
                if (tier(r) < tier(best)) best = r;
                continue;
            }
            if (deg(r) != deg(best)) {
                if (deg(r) > deg(best)) best = r;
                continue;
            }
            if (policy.jitter_seed != 0) {
                if (stable_hash(r->target, policy.jitter_seed) <
                    stable_hash(best->target, policy.jitter_seed))
                    best = r;
            } else if (r->target < best->target) {
                best = r;
            }
        }
        return best;
    }

    const DomainSchema& sch_;
};

}  // namespace graglab
