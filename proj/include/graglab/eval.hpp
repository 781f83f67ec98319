#pragma once
// End-to-end experiment harness: corpus -> (optional) poisoning -> indexing
// -> retrieval -> generation -> metrics, with deterministic fixed-precision
// reports.
//
// Metrics:
//   ASR   attack success rate over targeted queries: answered, and the gold
//         answer is absent from the response (abstention is not success)
//   R-ASR relation-level success: injected relations whose replacement
//         entity appears in every covered query's reasoning trace
//   TPQ   poison texts per covered query
//   QPP   covered queries per injected relation
//   ACC   accuracy over untargeted queries (gold answer in the response)

#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attack.hpp"
#include "corpus.hpp"
#include "defense.hpp"
#include "domain.hpp"
#include "embedding.hpp"
#include "extraction.hpp"
#include "generation.hpp"
#include "graph.hpp"
#include "querygen.hpp"
#include "record_io.hpp"
#include "retrieval.hpp"

namespace graglab {

struct Metrics {
    double asr = 0.0;
    double r_asr = 0.0;
    double tpq = 0.0;
    double qpp = 0.0;
    double acc = 0.0;
    std::size_t targeted = 0;
    std::size_t untargeted = 0;
    std::size_t poison_texts = 0;
    std::size_t injected_relations = 0;
};

struct QueryOutcome {
    std::string id;
    std::string question;       // as asked (after any paraphrase)
    std::string gold_answer;
    std::string answer;
    bool targeted = false;
    bool abstained = false;
    bool success = false;       // attack success (targeted only)
    bool correct = false;       // gold answer contained in the response
    std::string trace;          // hops joined with " / "
};

struct ExperimentConfig {
    Domain domain = Domain::cyber;
    std::optional<DomainSpec> spec;     // default_spec(domain, seed) when unset
    QueryGenConfig querygen;
    std::string method = "gragpoison";  // "gragpoison", "poisonedrag", "none"
    bool kg_aware = true;               // attack-side graph knowledge
    AttackConfig attack;
    ChunkConfig chunking;
    // The hashed bag-of-words embedding is noisier than a neural one and the
    // merged template descriptions are verbose, so the harness keeps a wider
    // window by default; the provider-contract defaults are unchanged.
    RetrievalConfig retrieval{
        .top_k_entities = 8, .top_k_relations = 24, .max_context_tokens = 6000};
    GenerationPolicy policy;
    std::map<std::string, int> trust_rule;  // empty: no trust annotation
    bool paraphrase_defense = false;
    std::set<std::string> target_ids;       // explicit target set; overrides target_count
    std::size_t target_count = 0;           // 0: every query is targeted
    double corpus_fraction = 1.0;
    std::uint64_t seed = 1;
};

struct ExperimentReport {
    std::string method;
    Domain domain = Domain::cyber;
    Metrics metrics;
    std::vector<QueryOutcome> outcomes;
    std::size_t documents = 0;
    std::size_t entities = 0;
    std::size_t relations = 0;
};

// Recount every rate from the raw outcomes; the single source of truth.
inline Metrics compute_metrics(const std::vector<QueryOutcome>& outcomes,
                               const AttackPlan* plan) {
    Metrics m;
    std::size_t attack_ok = 0, correct = 0;
    std::map<std::string, const QueryOutcome*> by_id;
    for (const auto& o : outcomes) {
        by_id[o.id] = &o;
        if (o.targeted) {
            ++m.targeted;
            attack_ok += o.success ? 1 : 0;
        } else {
            ++m.untargeted;
            correct += o.correct ? 1 : 0;
        }
    }
    if (m.targeted) m.asr = static_cast<double>(attack_ok) / static_cast<double>(m.targeted);
    if (m.untargeted) m.acc = static_cast<double>(correct) / static_cast<double>(m.untargeted);
    if (plan) {
        m.poison_texts = plan->poison_documents.size();
        m.injected_relations = plan->relations.size();
        std::size_t covered = plan->covered_queries();
        if (covered) m.tpq = static_cast<double>(m.poison_texts) / static_cast<double>(covered);
        if (m.injected_relations)
            m.qpp = static_cast<double>(covered) / static_cast<double>(m.injected_relations);
        std::size_t rel_ok = 0;
        for (const auto& inj : plan->relations) {
            bool all = !inj.covered_query_ids.empty();
            std::string needle = "-> " + inj.v_star;
            for (const auto& qid : inj.covered_query_ids) {
                auto it = by_id.find(qid);
                if (it == by_id.end() || it->second->trace.find(needle) == std::string::npos) {
                    all = false;
                    break;
                }
            }
            rel_ok += all ? 1 : 0;
        }
        if (m.injected_relations)
            m.r_asr = static_cast<double>(rel_ok) / static_cast<double>(m.injected_relations);
    }
    return m;
}

// The assembled pipeline state shared by evaluation and the detection
// defenses: poisoned corpus, indexed graph, embeddings, and query split.
struct ExperimentSetup {
    TemplateCorpus corpus;              // clean documents + gold triples
    std::vector<Query> queries;
    std::set<std::string> target_ids;
    std::optional<AttackPlan> plan;
    std::vector<Document> documents;    // clean (scaled) + poison, trust-annotated
    KnowledgeGraph graph;
    HashedEmbedder embedder;
    EntityIndex index;
    GenerationPolicy policy;
};

inline ExperimentSetup setup_experiment(const ExperimentConfig& cfg) {
    const DomainSchema& sch = schema(cfg.domain);
    DomainSpec spec = cfg.spec ? *cfg.spec : default_spec(cfg.domain, cfg.seed);
    spec.domain = cfg.domain;

    ExperimentSetup s;
    s.corpus = build_template_corpus(spec);
    s.queries = generate_queries(s.corpus.gold_triples, sch, cfg.querygen);

    std::vector<Query> targets;
    if (!cfg.target_ids.empty()) {
        for (const auto& q : s.queries)
            if (cfg.target_ids.count(q.id)) targets.push_back(q);
        if (targets.size() != cfg.target_ids.size())
            throw ConfigError("target_ids name queries absent from the generated set");
    } else {
        std::size_t n_targets = cfg.target_count == 0
                                    ? s.queries.size()
                                    : std::min(cfg.target_count, s.queries.size());
        targets.assign(s.queries.begin(), s.queries.begin() + static_cast<long>(n_targets));
    }
    for (const auto& q : targets) s.target_ids.insert(q.id);

    std::set<std::string> existing;
    for (const auto& t : s.corpus.gold_triples) {
        existing.insert(t.subject);
        existing.insert(t.object);
    }

    if (cfg.method == "gragpoison") {
        PatternExtractor clean_ex(cfg.domain);
        if (cfg.kg_aware) {
            KnowledgeGraph clean = build_graph(chunk_documents(s.corpus.documents, cfg.chunking), clean_ex);
            GraphPathInferencer inf(clean, cfg.domain);
            s.plan = build_attack_plan(targets, inf, sch, existing, cfg.attack);
        } else {
            AgnosticPathInferencer inf(cfg.domain);
            s.plan = build_attack_plan(targets, inf, sch, existing, cfg.attack);
        }
    } else if (cfg.method == "poisonedrag") {
        s.plan = poisonedrag_baseline(targets, sch, existing, 5, cfg.attack.max_tokens_per_text,
                                      cfg.attack.seed);
    } else if (cfg.method != "none") {
        throw ConfigError("unknown attack method '" + cfg.method + "'");
    }

    s.documents = s.corpus.documents;
    if (cfg.corpus_fraction < 1.0)
        s.documents = scale_corpus(std::move(s.documents), cfg.corpus_fraction, cfg.seed);
    if (s.plan)
        s.documents.insert(s.documents.end(), s.plan->poison_documents.begin(),
                           s.plan->poison_documents.end());
    if (!cfg.trust_rule.empty()) s.documents = annotate_trust(std::move(s.documents), cfg.trust_rule);

    PatternExtractor extractor(cfg.domain);
    s.graph = build_graph(chunk_documents(s.documents, cfg.chunking), extractor);
    detect_communities(s.graph, cfg.seed);
    summarize_communities(s.graph);
    s.index = EntityIndex::build(s.graph, s.embedder);

    s.policy = cfg.policy;
    return s;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const DomainSchema& sch = schema(cfg.domain);
    ExperimentSetup s = setup_experiment(cfg);
    RuleBasedGenerator generator(cfg.domain);
    GenerationPolicy policy = s.policy;
    if (policy.reference_prior && !policy.prior) policy.prior = &s.corpus.gold_triples;

    ExperimentReport rep;
    rep.method = s.plan ? s.plan->method : "none";
    rep.domain = cfg.domain;
    rep.documents = s.documents.size();
    rep.entities = s.graph.entities.size();
    rep.relations = s.graph.relations.size();
    for (const auto& q : s.queries) {
        std::string question = q.text;
        if (cfg.paraphrase_defense) {
            if (auto alt = paraphrase_question(sch, question, cfg.seed)) question = *alt;
        }
        RetrievedContext ctx = build_context(s.graph, s.index, s.embedder, question, cfg.retrieval);
        GenerationResult gen = generator.generate(question, ctx, policy);

        QueryOutcome o;
        o.id = q.id;
        o.question = question;
        o.gold_answer = q.gold_answer;
        o.answer = gen.answer;
        o.targeted = s.target_ids.count(q.id) != 0 && cfg.method != "none";
        o.abstained = gen.abstained;
        o.correct = contains_fold(gen.response, q.gold_answer);
        o.success = o.targeted && !gen.abstained && !o.correct;
        for (const auto& hop : gen.trace) {
            if (!o.trace.empty()) o.trace += " / ";
            o.trace += hop;
        }
        rep.outcomes.push_back(std::move(o));
    }
    rep.metrics = compute_metrics(rep.outcomes, s.plan ? &*s.plan : nullptr);
    return rep;
}

// Chain-of-thought consistency sweep over the targeted queries: regenerate
// each under several jitter seeds and flag trace disagreement.
inline std::vector<DetectionOutcome> run_cot_detection(
    const ExperimentConfig& cfg, const std::vector<std::uint64_t>& seeds = {11, 22, 33}) {
    ExperimentSetup s = setup_experiment(cfg);
    RuleBasedGenerator generator(cfg.domain);
    std::vector<DetectionOutcome> out;
    for (const auto& q : s.queries) {
        if (!s.target_ids.count(q.id)) continue;
        RetrievedContext ctx = build_context(s.graph, s.index, s.embedder, q.text, cfg.retrieval);
        CotReport rep = cot_consistency(generator, q.text, ctx, s.policy, seeds);
        out.push_back({q.id, rep.flagged ? 1.0 : 0.0, rep.flagged});
    }
    return out;
}

struct PerplexityReport {
    std::vector<DetectionOutcome> outcomes;  // per document; flagged = poison provenance
    double auc = 0.0;
};

// Character-bigram perplexity over every indexed document, scored against a
// model trained on the clean corpus; AUC separates poison from clean.
inline PerplexityReport run_perplexity_detection(const ExperimentConfig& cfg) {
    ExperimentSetup s = setup_experiment(cfg);
    CharBigramScorer scorer;
    for (const auto& d : s.documents)
        if (d.source_tag == "clean") scorer.train(d.text);
    PerplexityReport rep;
    std::vector<double> pos, neg;
    for (const auto& d : s.documents) {
        double score = scorer.score(d.text);
        bool poison = d.source_tag == "poison";
        (poison ? pos : neg).push_back(score);
        rep.outcomes.push_back({d.id, score, poison});
    }
    rep.auc = auc(pos, neg);
    return rep;
}

// ---------------------------------------------------------------------------
// Deterministic rendering

namespace detail {

inline std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

inline std::string render_report(const ExperimentReport& rep) {
    std::string s;
    s += "method\t" + rep.method + "\n";
    s += "domain\t" + domain_name(rep.domain) + "\n";
    s += "documents\t" + std::to_string(rep.documents) + "\n";
    s += "entities\t" + std::to_string(rep.entities) + "\n";
    s += "relations\t" + std::to_string(rep.relations) + "\n";
    s += "targeted\t" + std::to_string(rep.metrics.targeted) + "\n";
    s += "untargeted\t" + std::to_string(rep.metrics.untargeted) + "\n";
    s += "poison_texts\t" + std::to_string(rep.metrics.poison_texts) + "\n";
    s += "injected_relations\t" + std::to_string(rep.metrics.injected_relations) + "\n";
    s += "ASR\t" + detail::fixed6(rep.metrics.asr) + "\n";
    s += "R-ASR\t" + detail::fixed6(rep.metrics.r_asr) + "\n";
    s += "TPQ\t" + detail::fixed6(rep.metrics.tpq) + "\n";
    s += "QPP\t" + detail::fixed6(rep.metrics.qpp) + "\n";
    s += "ACC\t" + detail::fixed6(rep.metrics.acc) + "\n";
    return s;
}

inline std::string render_outcomes_csv(const ExperimentReport& rep) {
    auto cell = [](std::string v) {
        bool quote = v.find_first_of(",\"\n") != std::string::npos;
        if (!quote) return v;
        std::string out = "\"";
        for (char c : v) {
            if (c == '"') out += "\"\"";
            else out.push_back(c);
        }
        out += "\"";
        return out;
    };
    std::string s = "id,question,gold_answer,answer,targeted,abstained,success,correct,trace\n";
    for (const auto& o : rep.outcomes) {
        s += cell(o.id) + "," + cell(o.question) + "," + cell(o.gold_answer) + "," +
             cell(o.answer) + "," + (o.targeted ? "1" : "0") + "," + (o.abstained ? "1" : "0") +
             "," + (o.success ? "1" : "0") + "," + (o.correct ? "1" : "0") + "," + cell(o.trace) +
             "\n";
    }
    return s;
}

inline void save_report(const std::string& path, const ExperimentReport& rep) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << render_report(rep);
}

}  // namespace graglab
