// Experiment harness: metric recounting, report rendering, detection sweeps
// and run-level determinism on small configurations.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "graglab/eval.hpp"

using namespace graglab;

namespace {

ExperimentConfig small_cfg() {
    ExperimentConfig cfg;
    cfg.domain = Domain::cyber;
    cfg.querygen.hops = 2;
    cfg.seed = 1;
    return cfg;
}

}  // namespace

TEST_CASE("metrics recount from raw outcomes and the plan") {
    std::vector<QueryOutcome> outcomes(4);
    outcomes[0] = {"q0", "", "", "", true, false, true, false, "A -l-> V1"};
    outcomes[1] = {"q1", "", "", "", true, true, false, false, ""};
    outcomes[2] = {"q2", "", "", "", false, false, false, true, ""};
    outcomes[3] = {"q3", "", "", "", false, false, false, false, ""};

    AttackPlan plan;
    plan.relations.resize(2);
    plan.relations[0].v_star = "V1";
    plan.relations[0].covered_query_ids = {"q0"};
    plan.relations[1].v_star = "V2";
    plan.relations[1].covered_query_ids = {"q1"};
    for (int i = 0; i < 6; ++i)
        plan.poison_documents.push_back({"p" + std::to_string(i), "t", "poison", std::nullopt});

    Metrics m = compute_metrics(outcomes, &plan);
    CHECK(m.targeted == 2);
    CHECK(m.untargeted == 2);
    CHECK(m.asr == 0.5);   // q0 succeeded, q1 abstained
    CHECK(m.acc == 0.5);   // q2 correct, q3 wrong
    CHECK(m.poison_texts == 6);
    CHECK(m.injected_relations == 2);
    CHECK(m.tpq == 3.0);   // 6 texts / 2 covered queries
    CHECK(m.qpp == 1.0);
    CHECK(m.r_asr == 0.5); // V1 appears in q0's trace; V2 nowhere

    Metrics bare = compute_metrics(outcomes, nullptr);
    CHECK(bare.poison_texts == 0);
    CHECK(bare.tpq == 0.0);
    CHECK(bare.r_asr == 0.0);
}

TEST_CASE("reports render with fixed six-digit rates") {
    ExperimentReport rep;
    rep.method = "gragpoison";
    rep.domain = Domain::cyber;
    rep.metrics.asr = 1.0 / 3.0;
    std::string text = render_report(rep);
    CHECK(text.find("method\tgragpoison\n") != std::string::npos);
    CHECK(text.find("domain\tcyber\n") != std::string::npos);
    CHECK(text.find("ASR\t0.333333\n") != std::string::npos);
    CHECK(text.find("QPP\t0.000000\n") != std::string::npos);
}

TEST_CASE("outcome CSV quotes embedded commas and doubles quotes") {
    ExperimentReport rep;
    QueryOutcome o;
    o.id = "q0";
    o.question = "What, exactly?";
    o.answer = "He said \"yes\"";
    rep.outcomes.push_back(o);
    std::string csv = render_outcomes_csv(rep);
    CHECK(csv.find("\"What, exactly?\"") != std::string::npos);
    CHECK(csv.find("\"He said \"\"yes\"\"\"") != std::string::npos);
    CHECK(csv.rfind("id,question,gold_answer,answer,targeted,abstained,success,correct,trace\n", 0) == 0);
}

TEST_CASE("experiment configuration errors are reported, not swallowed") {
    ExperimentConfig cfg = small_cfg();
    cfg.method = "mystery";
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
    cfg = small_cfg();
    cfg.target_ids = {"q-cyber-0", "no-such-query"};
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("the clean pipeline answers every unambiguous two-hop question") {
    ExperimentConfig cfg = small_cfg();
    cfg.method = "none";
    ExperimentReport rep = run_experiment(cfg);
    CHECK(rep.method == "none");
    CHECK(rep.metrics.targeted == 0);
    CHECK(rep.metrics.untargeted == 24);
    CHECK(rep.metrics.acc == 1.0);
    CHECK(rep.documents == 24);
}

TEST_CASE("explicit target ids restrict the attack surface") {
    ExperimentConfig cfg = small_cfg();
    cfg.target_ids = {"q-cyber-0", "q-cyber-12"};
    ExperimentReport rep = run_experiment(cfg);
    CHECK(rep.metrics.targeted == 2);
    CHECK(rep.metrics.untargeted == 22);
    ExperimentSetup s = setup_experiment(cfg);
    REQUIRE(s.plan);
    CHECK(s.plan->relations.size() == 1);  // both targets share the utilizes hop
}

TEST_CASE("repeated runs are byte-identical") {
    ExperimentConfig cfg = small_cfg();
    ExperimentReport a = run_experiment(cfg);
    ExperimentReport b = run_experiment(cfg);
    CHECK(render_report(a) == render_report(b));
    CHECK(render_outcomes_csv(a) == render_outcomes_csv(b));

    auto dir = std::filesystem::temp_directory_path() / "graglab-test-eval";
    std::filesystem::create_directories(dir);
    save_report((dir / "a.txt").string(), a);
    save_report((dir / "b.txt").string(), b);
    std::ifstream fa(dir / "a.txt"), fb(dir / "b.txt");
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK_FALSE(sa.empty());
}

TEST_CASE("cot detection sweeps exactly the targeted queries") {
    ExperimentConfig cfg = small_cfg();
    cfg.target_ids = {"q-cyber-0", "q-cyber-12"};
    auto outcomes = run_cot_detection(cfg);
    REQUIRE(outcomes.size() == 2);
    for (const auto& o : outcomes) CHECK((o.id == "q-cyber-0" || o.id == "q-cyber-12"));
}

TEST_CASE("perplexity detection separates template poison from template prose") {
    ExperimentConfig cfg = small_cfg();
    PerplexityReport rep = run_perplexity_detection(cfg);
    CHECK(rep.outcomes.size() == 120);  // 24 clean + 96 poison documents
    CHECK(rep.auc == 1.0);
    std::size_t flagged = 0;
    for (const auto& o : rep.outcomes) flagged += o.flagged ? 1 : 0;
    CHECK(flagged == 96);
}
