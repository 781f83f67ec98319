// Defenses: paraphrase variants, chain-of-thought consistency, the
// character-bigram perplexity scorer, exact ROC/AUC and detection reports.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "graglab/defense.hpp"
#include "graglab/generation.hpp"

using namespace graglab;

TEST_CASE("paraphrasing swaps in a different registered variant of the same pattern") {
    const DomainSchema& sch = schema(Domain::cyber);
    std::string q = "How can the malware WORMA be mitigated?";
    for (std::size_t a = 0; a < 5; ++a) {
        auto alt = paraphrase_question(sch, q, a);
        REQUIRE(alt);
        CHECK(*alt != q);
        auto pq = parse_question(sch, *alt);
        REQUIRE(pq);
        CHECK(pq->anchor == "WORMA");
        CHECK(pq->pattern->type_ids == std::vector<std::string>{"utilizes", "mitigated"});
    }
    CHECK_FALSE(paraphrase_question(sch, "Not a registered question at all."));
}

TEST_CASE("cot consistency flags only disagreeing traces") {
    RuleBasedGenerator gen(Domain::cyber);
    KnowledgeGraph g;
    RetrievedContext ctx;
    ctx.graph = &g;
    g.relations.push_back({"WORMA", "JECTA", "utilizes"});
    g.relations.push_back({"WORMA", "JECTB", "utilizes"});  // residual tie
    for (const auto& r : g.relations) ctx.relations.push_back(&r);

    std::string q = "What attack technique does the malware WORMA utilize?";
    CotReport rep = cot_consistency(gen, q, ctx, {});
    REQUIRE(rep.traces.size() == 3);
    CHECK(rep.flagged);  // jitter seeds disagree on the tie

    // A single unambiguous relation is stable across seeds.
    RetrievedContext solo;
    solo.graph = &g;
    solo.relations.push_back(&g.relations.front());
    CotReport ok = cot_consistency(gen, q, solo, {});
    CHECK_FALSE(ok.flagged);
    for (const auto& t : ok.traces) CHECK(t == ok.traces.front());

    CHECK_THROWS_AS(cot_consistency(gen, q, ctx, {}, {11}), ConfigError);
}

TEST_CASE("the bigram scorer separates reference-like text from gibberish") {
    CharBigramScorer scorer;
    CHECK_THROWS_AS(scorer.score("anything"), ConfigError);
    for (int i = 0; i < 20; ++i)
        scorer.train("The malware WORMA utilizes JECTA. JECTA can be mitigated by GUARDX.");
    double familiar = scorer.score("The malware WORMA utilizes JECTA.");
    double alien = scorer.score("zqxj vvkp qqqq wxyz zzzz");
    CHECK(familiar < alien);
    CHECK(scorer.score("") == 0.0);
}

TEST_CASE("AUC is exact on separated, interleaved and identical score sets") {
    CHECK(std::abs(auc({5.0, 6.0, 7.0}, {1.0, 2.0, 3.0}) - 1.0) < 1e-9);
    CHECK(std::abs(auc({1.0, 2.0}, {1.0, 2.0}) - 0.5) < 1e-9);
    CHECK(std::abs(auc({2.0}, {1.0, 3.0}) - 0.5) < 1e-9);
    CHECK(std::abs(auc({1.0}, {2.0}) - 0.0) < 1e-9);
    CHECK_THROWS_AS(auc({}, {1.0}), ConfigError);
    CHECK_THROWS_AS(auc({1.0}, {}), ConfigError);
}

TEST_CASE("ROC curves include both endpoints and step monotonically") {
    auto pts = roc_points({5.0, 6.0, 7.0}, {1.0, 2.0, 3.0});
    REQUIRE(pts.size() >= 2);
    CHECK(pts.front() == std::make_pair(0.0, 0.0));
    CHECK(pts.back() == std::make_pair(1.0, 1.0));
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].first >= pts[i - 1].first);
        CHECK(pts[i].second >= pts[i - 1].second);
    }
    // Perfectly separated scores pass through (0, 1).
    bool corner = false;
    for (const auto& p : pts) corner = corner || (p.first == 0.0 && p.second == 1.0);
    CHECK(corner);
    CHECK_THROWS_AS(roc_points({}, {1.0}), ConfigError);
}

TEST_CASE("the default trust rule scores curated sources above uploads") {
    auto rule = default_trust_rule();
    CHECK(rule.at("clean") == 5);
    CHECK(rule.at("poison") == 3);
}

TEST_CASE("detection reports round-trip") {
    auto dir = std::filesystem::temp_directory_path() / "graglab-test-defense";
    std::filesystem::create_directories(dir);
    auto path = (dir / "detections.tsv").string();
    std::vector<DetectionOutcome> out = {{"q-0", 0.125, true}, {"q-1", 0.5, false}};
    save_detections(path, "perplexity", out);
    auto back = load_detections(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "q-0");
    CHECK(back[0].score == Catch::Approx(0.125));
    CHECK(back[0].flagged);
    CHECK_FALSE(back[1].flagged);
}
