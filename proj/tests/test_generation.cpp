// Deterministic generator: question parsing, the relation-precedence order,
// trust gating, prior-knowledge referencing and abstention.

#include <catch2/catch_amalgamated.hpp>

#include "graglab/generation.hpp"

using namespace graglab;

namespace {

struct Ctx {
    KnowledgeGraph graph;
    RetrievedContext ctx;

    Ctx() { ctx.graph = &graph; }

    Relation& add(std::string src, std::string label, std::string tgt) {
        graph.relations.push_back(Relation{std::move(src), std::move(tgt), std::move(label)});
        return graph.relations.back();
    }

    void chunk(std::string id, int trust) {
        TextChunk c;
        c.id = std::move(id);
        c.trust = trust;
        graph.chunks.push_back(std::move(c));
    }

    // Pointers are only valid once all relations are added.
    RetrievedContext& finish() {
        ctx.relations.clear();
        for (const auto& r : graph.relations) ctx.relations.push_back(&r);
        return ctx;
    }
};

const std::string kQ1 = "What attack technique does the malware WORMA utilize?";
const std::string kQ2 = "How can the malware WORMA be mitigated?";

}  // namespace

TEST_CASE("question parsing recovers pattern, variant and anchor") {
    const DomainSchema& sch = schema(Domain::cyber);
    auto pq = parse_question(sch, kQ2);
    REQUIRE(pq);
    CHECK(pq->anchor == "WORMA");
    CHECK(pq->variant == 0);
    REQUIRE(pq->pattern);
    CHECK(pq->pattern->type_ids == std::vector<std::string>{"utilizes", "mitigated"});

    auto alt = parse_question(sch, "How to mitigate the malware WORMA?");
    REQUIRE(alt);
    CHECK(alt->pattern == pq->pattern);
    CHECK(alt->variant == 3);
    CHECK(alt->anchor == "WORMA");

    CHECK_FALSE(parse_question(sch, "Tell me a story."));
    // Longest-literal disambiguation: the detection form never matches the
    // mitigation pattern.
    auto det = parse_question(sch, "How can the malware WORMA be detected?");
    REQUIRE(det);
    CHECK(det->pattern->type_ids.back() == "detected");
}

TEST_CASE("generator walks the chain and abstains on dead ends") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.add("WORMA", "utilizes", "JECTA");
    c.add("JECTA", "mitigated", "GUARDX");
    GenerationResult res = gen.generate(kQ2, c.finish(), {});
    CHECK_FALSE(res.abstained);
    CHECK(res.answer == "GUARDX");
    CHECK(res.response == "Based on the provided context, the answer is GUARDX.");
    REQUIRE(res.trace.size() == 2);
    CHECK(res.trace[0] == "WORMA -utilizes-> JECTA");
    CHECK(res.trace[1] == "JECTA -mitigated-> GUARDX");

    Ctx broken;
    broken.add("WORMA", "utilizes", "JECTA");  // no second hop
    GenerationResult dead = gen.generate(kQ2, broken.finish(), {});
    CHECK(dead.abstained);
    CHECK(dead.response == kAbstainResponse);

    GenerationResult unparsed = gen.generate("Nonsense?", c.finish(), {});
    CHECK(unparsed.abstained);
}

TEST_CASE("a direct anchor shortcut on the terminal label rescues a dead end") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.add("WORMA", "mitigated", "GUARDX");  // declarative shortcut, no chain
    GenerationResult res = gen.generate(kQ2, c.finish(), {});
    CHECK_FALSE(res.abstained);
    CHECK(res.answer == "GUARDX");
    REQUIRE(res.trace.size() == 1);
}

TEST_CASE("absence assertions never answer a question") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.add("WORMA", "utilizes", "JECTA").asserts_absence = true;
    GenerationResult res = gen.generate(kQ1, c.finish(), {});
    CHECK(res.abstained);
}

TEST_CASE("a complete challenger supersedes the competing object") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.add("WORMA", "utilizes", "JECTA");
    Relation& challenger = c.add("WORMA", "utilizes", "JECTB");
    challenger.negates = "JECTA";
    challenger.temporal = Date{2024, 10, 19};
    GenerationResult res = gen.generate(kQ1, c.finish(), {});
    CHECK(res.answer == "JECTB");
}

TEST_CASE("an incomplete challenger loses to a plain relation") {
    RuleBasedGenerator gen(Domain::cyber);
    // Negation link without a temporal marker: tier 2, does not invalidate.
    {
        Ctx c;
        c.add("WORMA", "utilizes", "JECTA");
        c.add("WORMA", "utilizes", "JECTB").negates = "JECTA";
        CHECK(gen.generate(kQ1, c.finish(), {}).answer == "JECTA");
    }
    // Temporal marker without a negation link: same.
    {
        Ctx c;
        c.add("WORMA", "utilizes", "JECTA");
        c.add("WORMA", "utilizes", "JECTB").temporal = Date{2024, 10, 19};
        CHECK(gen.generate(kQ1, c.finish(), {}).answer == "JECTA");
    }
}

TEST_CASE("endpoint-degree sum breaks ties between plain relations") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.add("WORMA", "utilizes", "JECTA");
    c.add("WORMA", "utilizes", "JECTB");
    // Raise JECTB's degree with unrelated incident relations.
    c.add("OTHER1", "mitigated", "JECTB");
    c.add("OTHER2", "detected", "JECTB");
    CHECK(gen.generate(kQ1, c.finish(), {}).answer == "JECTB");
}

TEST_CASE("remaining ties go lexicographic, or seeded under jitter") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.add("WORMA", "utilizes", "JECTA");
    c.add("WORMA", "utilizes", "JECTB");
    CHECK(gen.generate(kQ1, c.finish(), {}).answer == "JECTA");

    // Jitter replaces the lexicographic tie-break with a seeded hash; some
    // seed disagrees with the canonical pick.
    bool differs = false;
    for (std::uint64_t s : {11ull, 22ull, 33ull, 44ull, 55ull}) {
        GenerationPolicy p;
        p.jitter_seed = s;
        if (gen.generate(kQ1, c.finish(), p).answer != "JECTA") differs = true;
    }
    CHECK(differs);
}

TEST_CASE("trust outranks every structural rule when enabled") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.chunk("clean#0", 5);
    c.chunk("poison#0", 3);
    c.add("WORMA", "utilizes", "JECTA").chunk_ids = {"clean#0"};
    Relation& challenger = c.add("WORMA", "utilizes", "JECTB");
    challenger.negates = "JECTA";
    challenger.temporal = Date{2024, 10, 19};
    challenger.chunk_ids = {"poison#0"};

    // Without trust the challenger wins; with trust it can neither
    // invalidate nor outrank the 5/5 relation.
    CHECK(gen.generate(kQ1, c.finish(), {}).answer == "JECTB");
    GenerationPolicy trusted;
    trusted.use_trust = true;
    CHECK(gen.generate(kQ1, c.finish(), trusted).answer == "JECTA");

    // An equally trusted challenger invalidates as usual.
    c.graph.chunks[1].trust = 5;
    CHECK(gen.generate(kQ1, c.finish(), trusted).answer == "JECTB");
}

TEST_CASE("unannotated chunks count as neutral trust") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.chunk("low#0", 2);
    c.add("WORMA", "utilizes", "JECTA").chunk_ids = {"low#0"};
    Relation& other = c.add("WORMA", "utilizes", "JECTB");
    other.chunk_ids = {"missing#0"};  // unresolvable chunk: neutral 3
    GenerationPolicy trusted;
    trusted.use_trust = true;
    CHECK(gen.generate(kQ1, c.finish(), trusted).answer == "JECTB");
}

TEST_CASE("prior-knowledge referencing notes conflicts without changing the answer") {
    RuleBasedGenerator gen(Domain::cyber);
    Ctx c;
    c.add("WORMA", "utilizes", "JECTB");
    std::vector<Triple> prior = {{"WORMA", "utilizes", "JECTA"}};
    GenerationPolicy p;
    p.reference_prior = true;
    p.prior = &prior;
    GenerationResult res = gen.generate(kQ1, c.finish(), p);
    CHECK(res.answer == "JECTB");
    CHECK(res.conflict_noted);
    CHECK(res.response.find("disagrees with previously recorded background knowledge") !=
          std::string::npos);

    // Agreement or an incomplete prior keeps the note silent.
    std::vector<Triple> agree = {{"WORMA", "utilizes", "JECTB"}};
    p.prior = &agree;
    CHECK_FALSE(gen.generate(kQ1, c.finish(), p).conflict_noted);
    std::vector<Triple> unrelated = {{"X", "utilizes", "Y"}};
    p.prior = &unrelated;
    CHECK_FALSE(gen.generate(kQ1, c.finish(), p).conflict_noted);
}
