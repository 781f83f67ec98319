// Command-line surface for the toolkit: corpus generation, graph indexing,
// query synthesis, poison-plan construction, end-to-end evaluation, defense
// runs, and a thin chat-completions passthrough for live-model replication.
//
// Exit codes:
//   0  success
//   2  configuration / usage error
//   3  missing file or I/O failure
//   4  malformed input file
//   5  provider failure or unexpected error

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graglab/eval.hpp"
#include "graglab/http_chat.hpp"

namespace {

using namespace graglab;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitParse = 4;
constexpr int kExitOther = 5;

void emit_error(int code, const std::string& stage, const std::string& message) {
    Record rec;
    rec.kind = "error";
    rec.set("code", static_cast<long long>(code));
    rec.set("stage", stage);
    rec.set("message", message);
    std::cerr << format_record(rec) << "\n";
}

Domain require_domain(const std::string& name) {
    std::optional<Domain> d = parse_domain(name);
    if (!d) throw ConfigError("unknown domain '" + name + "' (geographic|medical|cyber)");
    return *d;
}

std::map<std::string, int> parse_trust_rule(const std::string& spec) {
    std::map<std::string, int> rule;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t comma = spec.find(',', pos);
        std::string item = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("trust rule item '" + item + "' is not tag=score");
        rule[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return rule;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

// Options shared by eval and defend; names mirror the config-file keys.
struct EvalOptions {
    std::string domain = "cyber";
    std::string method = "gragpoison";
    bool kg_agnostic = false;
    int hops = 2;
    std::size_t max_queries = 0;
    std::size_t target_count = 0;
    double corpus_fraction = 1.0;
    int n_alpha = 3;
    int n_beta = 5;
    std::size_t max_tokens_per_text = 30;
    bool no_temporal = false, no_negation = false, no_explanation = false;
    bool no_entity_selection = false, no_shuffle = false;
    std::size_t top_k_mapped_entities = 8;
    std::size_t top_k_relationships = 24;
    double text_unit_prop = 0.5;
    double community_prop = 0.1;
    std::size_t max_tokens = 6000;
    std::string trust_rule;  // "tag=score,..." (empty: no annotation)
    bool use_trust = false;
    bool reference_prior = false;
    bool paraphrase = false;
    std::uint64_t seed = 1;
    std::string provider = "deterministic";

    ExperimentConfig to_config() const {
        if (provider == "http")
            throw ConfigError(
                "the evaluation harness runs the deterministic providers; use the chat "
                "subcommand or the library client for live-model replication");
        if (provider != "deterministic")
            throw ConfigError("unknown provider mode '" + provider + "'");
        ExperimentConfig cfg;
        cfg.domain = require_domain(domain);
        cfg.method = method;
        cfg.kg_aware = !kg_agnostic;
        cfg.querygen = {hops, max_queries};
        cfg.target_count = target_count;
        cfg.corpus_fraction = corpus_fraction;
        cfg.attack.n_alpha = n_alpha;
        cfg.attack.n_beta = n_beta;
        cfg.attack.max_tokens_per_text = max_tokens_per_text;
        cfg.attack.seed = seed;
        cfg.attack.tricks = {!no_temporal, !no_negation, !no_explanation, !no_entity_selection,
                             !no_shuffle};
        cfg.retrieval.top_k_entities = top_k_mapped_entities;
        cfg.retrieval.top_k_relations = top_k_relationships;
        cfg.retrieval.text_unit_prop = text_unit_prop;
        cfg.retrieval.community_prop = community_prop;
        cfg.retrieval.max_context_tokens = max_tokens;
        if (!trust_rule.empty()) cfg.trust_rule = parse_trust_rule(trust_rule);
        cfg.policy.use_trust = use_trust;
        cfg.policy.reference_prior = reference_prior;
        cfg.paraphrase_defense = paraphrase;
        cfg.seed = seed;
        return cfg;
    }
};

void add_eval_options(CLI::App* cmd, EvalOptions& o) {
    cmd->set_config("--config", "", "Config file with the same keys as the flags");
    cmd->add_option("--domain", o.domain, "Corpus domain: geographic|medical|cyber");
    cmd->add_option("--method", o.method, "Attack method: gragpoison|poisonedrag|none");
    cmd->add_flag("--kg-agnostic", o.kg_agnostic, "Infer paths from question text only");
    cmd->add_option("--hops", o.hops, "Query hop count");
    cmd->add_option("--max-queries", o.max_queries, "Cap on generated queries (0: all)");
    cmd->add_option("--target-count", o.target_count, "Targeted query count (0: all)");
    cmd->add_option("--corpus-fraction", o.corpus_fraction, "Clean-corpus fraction kept");
    cmd->add_option("--n-alpha", o.n_alpha, "Narrative replicas per injected relation");
    cmd->add_option("--n-beta", o.n_beta, "Enhancement supports per injected entity");
    cmd->add_option("--max-tokens-per-text", o.max_tokens_per_text, "Poison text token budget");
    cmd->add_flag("--no-temporal", o.no_temporal, "Disable the temporal-ordering trick");
    cmd->add_flag("--no-negation", o.no_negation, "Disable the explicit-negation trick");
    cmd->add_flag("--no-explanation", o.no_explanation, "Disable the contextual-explanation trick");
    cmd->add_flag("--no-entity-selection", o.no_entity_selection,
                  "Disable the entity-selection trick");
    cmd->add_flag("--no-shuffle", o.no_shuffle, "Disable poison-document shuffling");
    cmd->add_option("--top_k_mapped_entities", o.top_k_mapped_entities, "Entities in context");
    cmd->add_option("--top_k_relationships", o.top_k_relationships, "Relations in context");
    cmd->add_option("--text_unit_prop", o.text_unit_prop, "Context share for source chunks");
    cmd->add_option("--community_prop", o.community_prop, "Context share for community reports");
    cmd->add_option("--max_tokens", o.max_tokens, "Context token budget");
    cmd->add_option("--trust-rule", o.trust_rule, "Provenance trust rule, e.g. clean=5,poison=2");
    cmd->add_flag("--use-trust", o.use_trust, "Trust-aware generation precedence");
    cmd->add_flag("--reference-prior", o.reference_prior, "Cross-check against prior knowledge");
    cmd->add_flag("--paraphrase", o.paraphrase, "Paraphrase queries before retrieval");
    cmd->add_option("--seed", o.seed, "Run seed (deterministic mode)");
    cmd->add_option("--provider", o.provider, "Provider mode: deterministic|http");
}

// ---------------------------------------------------------------------------

int cmd_corpus(const std::string& domain, std::uint64_t seed, double fraction,
               const std::string& trust_rule, const std::string& out_dir) {
    DomainSpec spec = default_spec(require_domain(domain), seed);
    TemplateCorpus corpus = build_template_corpus(spec);
    std::vector<Document> docs = corpus.documents;
    if (fraction < 1.0) docs = scale_corpus(std::move(docs), fraction, seed);
    if (!trust_rule.empty()) docs = annotate_trust(std::move(docs), parse_trust_rule(trust_rule));
    save_corpus(out_dir, docs);
    std::cout << "documents\t" << docs.size() << "\n";
    return 0;
}

int cmd_index(const std::string& corpus_dir, const std::string& domain, std::size_t chunk_size,
              std::size_t chunk_overlap, std::uint64_t seed, const std::string& out_file) {
    std::vector<Document> docs;
    if (std::filesystem::exists(std::filesystem::path(corpus_dir) / "manifest.tsv"))
        docs = load_corpus(corpus_dir);
    PatternExtractor extractor(require_domain(domain));
    KnowledgeGraph g = build_graph(chunk_documents(docs, {chunk_size, chunk_overlap}), extractor);
    detect_communities(g, seed);
    summarize_communities(g);
    save_graph(out_file, g);
    std::cout << "entities\t" << g.entities.size() << "\nrelations\t" << g.relations.size()
              << "\ncommunities\t" << g.communities.size() << "\n";
    return 0;
}

int cmd_queries(const std::string& graph_file, const std::string& domain, int hops,
                std::size_t max_queries, const std::string& out_file) {
    KnowledgeGraph g = load_graph(graph_file);
    std::vector<Triple> triples;
    for (const auto& r : g.relations)
        if (!r.asserts_absence) triples.push_back({r.source, r.label, r.target});
    std::vector<Query> queries =
        generate_queries(triples, schema(require_domain(domain)), {hops, max_queries});
    save_queries(out_file, queries);
    std::cout << "queries\t" << queries.size() << "\n";
    return 0;
}

int cmd_attack(const std::string& queries_file, const std::string& domain,
               const std::string& graph_file, bool baseline, bool kg_agnostic,
               const AttackConfig& acfg, const std::string& plan_file,
               const std::string& poison_dir) {
    Domain d = require_domain(domain);
    const DomainSchema& sch = schema(d);
    std::vector<Query> queries = load_queries(queries_file);

    std::set<std::string> existing;
    std::optional<KnowledgeGraph> g;
    if (!graph_file.empty()) {
        g = load_graph(graph_file);
        for (const auto& e : g->entities) existing.insert(e.name);
    } else {
        for (const auto& q : queries)
            for (const auto& t : q.gold_path) {
                existing.insert(t.subject);
                existing.insert(t.object);
            }
    }

    AttackPlan plan;
    if (baseline) {
        plan = poisonedrag_baseline(queries, sch, existing, 5, acfg.max_tokens_per_text, acfg.seed);
    } else if (kg_agnostic) {
        AgnosticPathInferencer inf(d);
        plan = build_attack_plan(queries, inf, sch, existing, acfg);
    } else {
        if (!g) throw ConfigError("knowledge-graph-aware attack needs --graph (or --kg-agnostic)");
        GraphPathInferencer inf(*g, d);
        plan = build_attack_plan(queries, inf, sch, existing, acfg);
    }
    save_plan(plan_file, plan);
    if (!poison_dir.empty()) save_corpus(poison_dir, plan.poison_documents);
    std::cout << "method\t" << plan.method << "\ninjected_relations\t" << plan.relations.size()
              << "\npoison_texts\t" << plan.poison_documents.size() << "\ncovered_queries\t"
              << plan.covered_queries() << "\n";
    return 0;
}

int cmd_eval(const EvalOptions& opts, const std::string& report_file,
             const std::string& outcomes_file) {
    ExperimentReport rep = run_experiment(opts.to_config());
    std::string report = render_report(rep);
    if (report_file.empty()) std::cout << report;
    else write_file(report_file, report);
    if (!outcomes_file.empty()) write_file(outcomes_file, render_outcomes_csv(rep));
    return 0;
}

int cmd_defend(EvalOptions opts, const std::string& defense, const std::string& report_file,
               const std::string& detections_file) {
    if (defense == "trust") {
        if (opts.trust_rule.empty()) opts.trust_rule = "clean=5,poison=3";
        opts.use_trust = true;
    } else if (defense == "paraphrase") {
        opts.paraphrase = true;
    } else if (defense == "prior") {
        opts.reference_prior = true;
    } else if (defense == "cot") {
        std::vector<DetectionOutcome> det = run_cot_detection(opts.to_config());
        std::size_t flagged = 0;
        for (const auto& o : det) flagged += o.flagged ? 1 : 0;
        if (!detections_file.empty()) save_detections(detections_file, "cot", det);
        std::string summary = "detector\tcot\nqueries\t" + std::to_string(det.size()) +
                              "\nflagged\t" + std::to_string(flagged) + "\n";
        if (report_file.empty()) std::cout << summary;
        else write_file(report_file, summary);
        return 0;
    } else if (defense == "perplexity") {
        PerplexityReport rep = run_perplexity_detection(opts.to_config());
        if (!detections_file.empty()) save_detections(detections_file, "perplexity", rep.outcomes);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", rep.auc);
        std::string summary = "detector\tperplexity\ndocuments\t" +
                              std::to_string(rep.outcomes.size()) + "\nAUC\t" + buf + "\n";
        if (report_file.empty()) std::cout << summary;
        else write_file(report_file, summary);
        return 0;
    } else {
        throw ConfigError("unknown defense '" + defense +
                          "' (trust|paraphrase|prior|cot|perplexity)");
    }
    return cmd_eval(opts, report_file, "");
}

int cmd_chat(const std::string& system_file, const std::string& user_file, double temperature) {
    ChatConfig cfg = ChatConfig::from_env();
    cfg.temperature = temperature;
    ChatClient client(cfg);
    std::string system = system_file.empty() ? std::string() : read_file(system_file);
    std::cout << client.complete(system, read_file(user_file)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph RAG poisoning laboratory"};
    app.require_subcommand(1);

    // corpus
    std::string c_domain = "cyber", c_out;
    std::uint64_t c_seed = 1;
    double c_fraction = 1.0;
    std::string c_trust;
    CLI::App* corpus = app.add_subcommand("corpus", "Generate a template corpus");
    corpus->add_option("--domain", c_domain, "geographic|medical|cyber");
    corpus->add_option("--seed", c_seed, "Corpus seed");
    corpus->add_option("--fraction", c_fraction, "Fraction of documents kept");
    corpus->add_option("--trust-rule", c_trust, "Provenance trust rule, e.g. clean=5");
    corpus->add_option("--out", c_out, "Output directory")->required();

    // index
    std::string i_corpus, i_domain = "cyber", i_out;
    std::size_t i_chunk = 1200, i_overlap = 100;
    std::uint64_t i_seed = 7;
    CLI::App* index = app.add_subcommand("index", "Build the knowledge graph from a corpus");
    index->add_option("--corpus", i_corpus, "Corpus directory")->required();
    index->add_option("--domain", i_domain, "geographic|medical|cyber");
    index->add_option("--chunk-size", i_chunk, "Tokens per chunk");
    index->add_option("--chunk-overlap", i_overlap, "Tokens shared between neighbour chunks");
    index->add_option("--seed", i_seed, "Community-detection seed");
    index->add_option("--out", i_out, "Output graph file")->required();

    // queries
    std::string q_graph, q_domain = "cyber", q_out;
    int q_hops = 2;
    std::size_t q_max = 0;
    CLI::App* queries = app.add_subcommand("queries", "Synthesize multi-hop queries from a graph");
    queries->add_option("--graph", q_graph, "Graph file")->required();
    queries->add_option("--domain", q_domain, "geographic|medical|cyber");
    queries->add_option("--hops", q_hops, "Hops per query");
    queries->add_option("--max", q_max, "Cap on generated queries (0: all)");
    queries->add_option("--out", q_out, "Output query file")->required();

    // attack
    std::string a_queries, a_domain = "cyber", a_graph, a_plan, a_poison_dir, a_date = "2024/10/19";
    bool a_baseline = false, a_agnostic = false;
    bool a_no_temporal = false, a_no_negation = false, a_no_explanation = false;
    bool a_no_entity = false, a_no_shuffle = false;
    AttackConfig acfg;
    CLI::App* attack = app.add_subcommand("attack", "Build a poisoning plan");
    attack->add_option("--queries", a_queries, "Query file")->required();
    attack->add_option("--domain", a_domain, "geographic|medical|cyber");
    attack->add_option("--graph", a_graph, "Graph file (knowledge-graph-aware mode)");
    attack->add_flag("--baseline", a_baseline, "Per-query declarative baseline");
    attack->add_flag("--kg-agnostic", a_agnostic, "Infer paths from question text only");
    attack->add_option("--n-alpha", acfg.n_alpha, "Narrative replicas per injected relation");
    attack->add_option("--n-beta", acfg.n_beta, "Enhancement supports per injected entity");
    attack->add_option("--max-tokens-per-text", acfg.max_tokens_per_text, "Poison token budget");
    attack->add_option("--date", a_date, "Narrative date, YYYY/MM/DD");
    attack->add_option("--seed", acfg.seed, "Attack seed");
    attack->add_flag("--no-temporal", a_no_temporal, "Disable the temporal-ordering trick");
    attack->add_flag("--no-negation", a_no_negation, "Disable the explicit-negation trick");
    attack->add_flag("--no-explanation", a_no_explanation, "Disable the explanation trick");
    attack->add_flag("--no-entity-selection", a_no_entity, "Disable the entity-selection trick");
    attack->add_flag("--no-shuffle", a_no_shuffle, "Disable poison-document shuffling");
    attack->add_option("--out-plan", a_plan, "Output plan file")->required();
    attack->add_option("--out-poison", a_poison_dir, "Poison corpus directory");

    // eval
    EvalOptions e_opts;
    std::string e_report, e_outcomes;
    CLI::App* eval = app.add_subcommand("eval", "Run the end-to-end evaluation");
    add_eval_options(eval, e_opts);
    eval->add_option("--report", e_report, "Report file (default: stdout)");
    eval->add_option("--outcomes", e_outcomes, "Per-query outcomes CSV");

    // defend
    EvalOptions d_opts;
    std::string d_defense, d_report, d_detections;
    CLI::App* defend = app.add_subcommand("defend", "Run the evaluation under a defense");
    add_eval_options(defend, d_opts);
    defend->add_option("--defense", d_defense, "trust|paraphrase|prior|cot|perplexity")->required();
    defend->add_option("--report", d_report, "Report file (default: stdout)");
    defend->add_option("--detections", d_detections, "Detection outcomes file");

    // chat
    std::string h_system, h_user;
    double h_temperature = 0.0;
    CLI::App* chat = app.add_subcommand("chat", "Send a prompt to the configured chat endpoint");
    chat->add_option("--system", h_system, "System prompt file");
    chat->add_option("--user", h_user, "User prompt file")->required();
    chat->add_option("--temperature", h_temperature, "Sampling temperature");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*corpus) return cmd_corpus(c_domain, c_seed, c_fraction, c_trust, c_out);
        if (*index) return cmd_index(i_corpus, i_domain, i_chunk, i_overlap, i_seed, i_out);
        if (*queries) return cmd_queries(q_graph, q_domain, q_hops, q_max, q_out);
        if (*attack) {
            auto date = Date::parse(a_date);
            if (!date) throw ConfigError("bad --date '" + a_date + "' (YYYY/MM/DD)");
            acfg.attack_date = *date;
            acfg.tricks = {!a_no_temporal, !a_no_negation, !a_no_explanation, !a_no_entity,
                           !a_no_shuffle};
            return cmd_attack(a_queries, a_domain, a_graph, a_baseline, a_agnostic, acfg, a_plan,
                              a_poison_dir);
        }
        if (*eval) return cmd_eval(e_opts, e_report, e_outcomes);
        if (*defend) return cmd_defend(d_opts, d_defense, d_report, d_detections);
        if (*chat) return cmd_chat(h_system, h_user, h_temperature);
    } catch (const ConfigError& e) {
        emit_error(kExitUsage, app.get_subcommands().front()->get_name(), e.what());
        return kExitUsage;
    } catch (const ParseError& e) {
        emit_error(kExitParse, app.get_subcommands().front()->get_name(), e.what());
        return kExitParse;
    } catch (const std::ios_base::failure& e) {
        emit_error(kExitIo, app.get_subcommands().front()->get_name(), e.what());
        return kExitIo;
    } catch (const std::runtime_error& e) {
        std::string what = e.what();
        bool io = what.find("cannot read") != std::string::npos ||
                  what.find("cannot write") != std::string::npos ||
                  what.find("missing document file") != std::string::npos;
        emit_error(io ? kExitIo : kExitOther, app.get_subcommands().front()->get_name(), what);
        return io ? kExitIo : kExitOther;
    } catch (const std::exception& e) {
        emit_error(kExitOther, app.get_subcommands().front()->get_name(), e.what());
        return kExitOther;
    }
    return kExitUsage;
}
