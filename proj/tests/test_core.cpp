// Text primitives, record I/O, embeddings, template corpora and query
// synthesis. Derived values asserted here were computed once with
// independent scratch programs and frozen.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "graglab/corpus.hpp"
#include "graglab/embedding.hpp"
#include "graglab/extraction.hpp"
#include "graglab/graph.hpp"
#include "graglab/querygen.hpp"
#include "graglab/record_io.hpp"
#include "graglab/text.hpp"

using namespace graglab;

namespace {

std::filesystem::path tmp_dir() {
    auto p = std::filesystem::temp_directory_path() / "graglab-test-core";
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// text.hpp

TEST_CASE("tokenizer treats alphanumeric runs as tokens") {
    CHECK(tokenize("alpha beta-2, gamma.") == std::vector<std::string>{"alpha", "beta", "2", "gamma"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("...!?") == std::vector<std::string>{});
    CHECK(count_tokens("alpha beta-2, gamma.") == 4);
    CHECK(count_tokens("") == 0);
    // count_tokens agrees with tokenize on assorted inputs
    for (std::string s : {"one", "a;b;c", "  lead  trail  ", "x1x2 x3", "don't stop"})
        CHECK(count_tokens(s) == tokenize(s).size());
}

TEST_CASE("truncate_tokens cuts at token boundaries") {
    CHECK(truncate_tokens("one two three four", 2) == "one two");
    CHECK(truncate_tokens("one two", 10) == "one two");
    CHECK(truncate_tokens("one two", 0) == "");
    CHECK(count_tokens(truncate_tokens("a, b, c, d, e.", 3)) == 3);
}

TEST_CASE("sentence splitting on terminal punctuation") {
    auto s = split_sentences("First. Second! Third? tail");
    REQUIRE(s.size() == 4);
    CHECK(s[0] == "First.");
    CHECK(s[1] == "Second!");
    CHECK(s[2] == "Third?");
    CHECK(s[3] == "tail");
}

TEST_CASE("canonical_name trims, collapses and upper-cases") {
    CHECK(canonical_name("  new   Lsass memory ") == "NEW LSASS MEMORY");
    CHECK(canonical_name("abc") == "ABC");
    CHECK(canonical_name("   ") == "");
}

TEST_CASE("stable_hash is FNV-1a with seed mixing") {
    CHECK(stable_hash("abc") == 16654208175385433931ull);
    CHECK(stable_hash("abc") != stable_hash("abd"));
    CHECK(stable_hash("abc", 1) != stable_hash("abc", 2));
    CHECK(stable_hash("") == 14695981039346656037ull);
}

TEST_CASE("dates parse both separators and order correctly") {
    auto d = Date::parse("2024/10/19");
    REQUIRE(d);
    CHECK(d->str() == "2024/10/19");
    CHECK(Date::parse("2024-10-19") == d);
    CHECK_FALSE(Date::parse("2024/13/01"));
    CHECK_FALSE(Date::parse("nonsense"));
    CHECK(Date{2024, 1, 2} < Date{2024, 1, 3});
    CHECK(Date{2023, 12, 31} < Date{2024, 1, 1});
}

TEST_CASE("contains_fold is case-insensitive and rejects empty needles") {
    CHECK(contains_fold("The answer is BALCORSCAN.", "balcorscan"));
    CHECK_FALSE(contains_fold("anything", ""));
    CHECK_FALSE(contains_fold("abc", "abd"));
}

// ---------------------------------------------------------------------------
// record_io.hpp

TEST_CASE("record lines round-trip through escaping") {
    Record r;
    r.kind = "doc";
    r.set("text", "tab\there\nnewline \\ backslash");
    r.set("k=v", "value=with=equals");
    std::string line = format_record(r);
    CHECK(line.find('\n') == std::string::npos);
    Record back = parse_record(line, 1);
    CHECK(back.kind == r.kind);
    REQUIRE(back.fields.size() == 2);
    CHECK(back.get("text") == "tab\there\nnewline \\ backslash");
    CHECK(back.get("k=v") == "value=with=equals");
}

TEST_CASE("record parsing rejects malformed lines with line numbers") {
    CHECK_THROWS_AS(parse_record("kind\tno-equals-field", 7), ParseError);
    CHECK_THROWS_AS(parse_record("kind\tdangling\\", 3), ParseError);
    CHECK_THROWS_AS(parse_record("\tx=y", 2), ParseError);  // empty kind
    try {
        parse_record("kind\tbad", 42);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 42);
    }
}

TEST_CASE("record files round-trip including blank-line tolerance") {
    auto path = (tmp_dir() / "records.tsv").string();
    std::vector<Record> recs(2);
    recs[0].kind = "a";
    recs[0].set("x", "1");
    recs[1].kind = "b";
    recs[1].set("y", "two\twords");
    write_records(path, recs);
    auto back = read_records(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].get("y") == "two\twords");
    CHECK(back[0].get_int("x") == 1);
    CHECK_THROWS(read_records((tmp_dir() / "absent.tsv").string()));
}

// ---------------------------------------------------------------------------
// embedding.hpp

TEST_CASE("hashed embeddings are unit-norm, deterministic and sparse on empty text") {
    HashedEmbedder emb;
    CHECK(emb.dim() == 256);
    Embedding v = emb.embed("The malware BRUMORWORM utilizes WEXMORJECTION.");
    REQUIRE(v.size() == 256);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-9);
    CHECK(v == emb.embed("The malware BRUMORWORM utilizes WEXMORJECTION."));

    Embedding zero = emb.embed("");
    for (double x : zero) CHECK(x == 0.0);
    CHECK(cosine(zero, v) == 0.0);
    CHECK(cosine(v, v) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("stopwords carry no signal and casing does not matter") {
    HashedEmbedder emb;
    for (double x : emb.embed("the of and is")) CHECK(x == 0.0);
    CHECK(emb.embed("BRUMORWORM") == emb.embed("brumorworm"));
    // Inflected forms stem into the same bucket.
    CHECK(emb.embed("mitigated") == emb.embed("mitigates"));
    HashedEmbedder raw(256, 0x9e3779b9ull, false);
    bool any = false;
    for (double x : raw.embed("the of and is")) any = any || x != 0.0;
    CHECK(any);
}

TEST_CASE("cosine guards dimension mismatch") {
    CHECK(cosine({1.0, 0.0}, {1.0, 0.0, 0.0}) == 0.0);
    CHECK(cosine({}, {}) == 0.0);
}

// ---------------------------------------------------------------------------
// corpus.hpp

TEST_CASE("template corpora exist for every domain with deduplicated triples") {
    for (Domain d : {Domain::geographic, Domain::medical, Domain::cyber}) {
        TemplateCorpus c = build_template_corpus(default_spec(d, 1));
        CHECK_FALSE(c.documents.empty());
        CHECK_FALSE(c.gold_triples.empty());
        for (const auto& doc : c.documents) CHECK_FALSE(doc.text.empty());
        std::set<Triple> uniq(c.gold_triples.begin(), c.gold_triples.end());
        CHECK(uniq.size() == c.gold_triples.size());
        CHECK(std::is_sorted(c.gold_triples.begin(), c.gold_triples.end()));
    }
    // Frozen default cyber shape.
    TemplateCorpus c = build_template_corpus(default_spec(Domain::cyber, 1));
    CHECK(c.documents.size() == 24);
    CHECK(c.gold_triples.size() == 36);
}

TEST_CASE("corpus generation is seed-deterministic and seed-sensitive") {
    DomainSpec spec = default_spec(Domain::medical, 5);
    TemplateCorpus a = build_template_corpus(spec);
    TemplateCorpus b = build_template_corpus(spec);
    REQUIRE(a.documents.size() == b.documents.size());
    for (std::size_t i = 0; i < a.documents.size(); ++i) CHECK(a.documents[i].text == b.documents[i].text);
    TemplateCorpus other = build_template_corpus(default_spec(Domain::medical, 6));
    CHECK(a.documents.front().text != other.documents.front().text);
}

TEST_CASE("trust annotation appends the suffix and validates the rule") {
    std::vector<Document> docs = {{"d0", "Some text.", "clean", std::nullopt},
                                  {"d1", "Other text.", "poison", std::nullopt}};
    auto out = annotate_trust(docs, {{"clean", 5}, {"poison", 3}});
    CHECK(out[0].trust == 5);
    CHECK(out[1].trust == 3);
    CHECK(out[0].text == "Some text. The trustworthiness of this paragraph is 5/5.");
    CHECK(out[1].text.find("3/5.") != std::string::npos);
    CHECK_THROWS_AS(annotate_trust(docs, {{"clean", 5}}), ConfigError);
    CHECK_THROWS_AS(annotate_trust(docs, {{"clean", 9}, {"poison", 3}}), ConfigError);
}

TEST_CASE("corpus scaling keeps a seeded fraction") {
    std::vector<Document> docs;
    for (int i = 0; i < 10; ++i)
        docs.push_back({"d" + std::to_string(i), "text", "clean", std::nullopt});
    auto half = scale_corpus(docs, 0.5, 3);
    CHECK(half.size() == 5);
    CHECK(scale_corpus(docs, 1.0, 3).size() == 10);
    CHECK(scale_corpus(docs, 0.0, 3).empty());
    // deterministic
    auto again = scale_corpus(docs, 0.5, 3);
    for (std::size_t i = 0; i < half.size(); ++i) CHECK(half[i].id == again[i].id);
    CHECK_THROWS_AS(scale_corpus(docs, 1.5, 3), ConfigError);
}

TEST_CASE("corpus directories and query files round-trip") {
    auto dir = (tmp_dir() / "corpus").string();
    TemplateCorpus c = build_template_corpus(default_spec(Domain::cyber, 2));
    auto docs = annotate_trust(c.documents, {{"clean", 5}});
    save_corpus(dir, docs);
    auto back = load_corpus(dir);
    REQUIRE(back.size() == docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        CHECK(back[i].id == docs[i].id);
        CHECK(back[i].text == docs[i].text);
        CHECK(back[i].source_tag == docs[i].source_tag);
        CHECK(back[i].trust == docs[i].trust);
    }

    auto queries = generate_queries(c.gold_triples, schema(Domain::cyber), {.hops = 2});
    auto qpath = (tmp_dir() / "queries.tsv").string();
    save_queries(qpath, queries);
    auto qback = load_queries(qpath);
    REQUIRE(qback.size() == queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        CHECK(qback[i].id == queries[i].id);
        CHECK(qback[i].text == queries[i].text);
        CHECK(qback[i].gold_path == queries[i].gold_path);
        CHECK(qback[i].gold_answer == queries[i].gold_answer);
    }
}

// ---------------------------------------------------------------------------
// querygen.hpp

TEST_CASE("query synthesis keeps only unambiguous chains") {
    TemplateCorpus c = build_template_corpus(default_spec(Domain::cyber, 1));
    auto queries = generate_queries(c.gold_triples, schema(Domain::cyber), {.hops = 2});
    CHECK(queries.size() == 24);  // 12 malware x {mitigated, detected}
    std::map<std::pair<std::string, std::string>, std::set<std::string>> forward;
    for (const auto& t : c.gold_triples) forward[{t.subject, t.type_id}].insert(t.object);
    for (const auto& q : queries) {
        CHECK(q.hop_count == 2);
        q.validate();
        for (const auto& hop : q.gold_path) {
            auto it = forward.find({hop.subject, hop.type_id});
            REQUIRE(it != forward.end());
            CHECK(it->second.size() == 1);  // unambiguous by construction
            CHECK(it->second.count(hop.object) == 1);
        }
    }
    CHECK_THROWS_AS(generate_queries(c.gold_triples, schema(Domain::cyber), {.hops = 5}),
                    ConfigError);
    CHECK(generate_queries(c.gold_triples, schema(Domain::cyber), {.hops = 2, .max_queries = 3}).size() == 3);
}

// ---------------------------------------------------------------------------
// extraction round-trip (acceptance criterion 1 at unit granularity)

TEST_CASE("extraction inverts the template grammar exactly on every domain") {
    for (Domain d : {Domain::geographic, Domain::medical, Domain::cyber}) {
        TemplateCorpus c = build_template_corpus(default_spec(d, 4));
        PatternExtractor ex(d);
        std::set<Triple> got;
        std::size_t skipped = 0;
        for (const auto& chunk : chunk_documents(c.documents)) {
            ExtractionFragment frag = ex.extract(chunk.text);
            skipped += frag.skipped;
            for (const auto& r : frag.relations)
                if (!r.negation) got.insert({r.subject, r.type_id, r.object});
        }
        std::set<Triple> gold(c.gold_triples.begin(), c.gold_triples.end());
        CHECK(skipped == 0);
        CHECK(got == gold);  // precision = recall = 1.0
    }
}

TEST_CASE("extractor handles narrative heads, negation, dates and trust suffixes") {
    PatternExtractor ex(Domain::cyber);
    ExtractionFragment frag = ex.extract(
        "After 2024/10/19, the malware WORMA does not utilize JECTA anymore; instead, "
        "the malware WORMA utilizes JECTB. This change occurs due to the update of WORMA. "
        "The trustworthiness of this paragraph is 3/5.");
    REQUIRE(frag.relations.size() == 2);
    const ExtractedRelation& neg = frag.relations[0];
    CHECK(neg.negation);
    CHECK(neg.subject == "WORMA");
    CHECK(neg.object == "JECTA");
    REQUIRE(neg.temporal_marker);
    CHECK(neg.temporal_marker->str() == "2024/10/19");
    const ExtractedRelation& pos = frag.relations[1];
    CHECK_FALSE(pos.negation);
    CHECK(pos.object == "JECTB");
    CHECK(pos.negated_object == "JECTA");  // supersession carry-over
    REQUIRE(pos.temporal_marker);
    CHECK(frag.skipped == 0);

    ExtractionFragment enh = ex.extract("BALCREST can mitigate NEW JECTA, which is utilized by the malware WORMA.");
    // enhancement clause: (NEW JECTA, mitigated, BALCREST) + which-clause (WORMA, utilizes, NEW JECTA)
    REQUIRE(enh.relations.size() == 2);
    CHECK(enh.relations[0].subject == "NEW JECTA");
    CHECK(enh.relations[0].type_id == "mitigated");
    CHECK(enh.relations[0].object == "BALCREST");
    CHECK(enh.relations[1].subject == "WORMA");
    CHECK(enh.relations[1].type_id == "utilizes");
    CHECK(enh.relations[1].object == "NEW JECTA");

    ExtractionFragment junk = ex.extract("This sentence matches nothing.");
    CHECK(junk.relations.empty());
    CHECK(junk.skipped == 1);
}

TEST_CASE("extraction of one thousand sentences stays under the latency budget") {
    DomainSpec big = default_spec(Domain::cyber, 9);
    big.entity_counts = {{"malware", 400}, {"technique", 400}, {"mitigation", 400}, {"detection", 400}};
    TemplateCorpus c = build_template_corpus(big);
    std::size_t sentences = 0;
    for (const auto& d : c.documents) sentences += split_sentences(d.text).size();
    REQUIRE(sentences >= 1000);
    PatternExtractor ex(Domain::cyber);
    auto t0 = std::chrono::steady_clock::now();
    std::size_t relations = 0;
    for (const auto& chunk : chunk_documents(c.documents))
        relations += ex.extract(chunk.text).relations.size();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(relations >= sentences);  // every sentence encodes at least one relation
    CHECK(secs < 5.0);
}
