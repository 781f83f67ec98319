#pragma once
// Domain schemas for the three template corpora (geographic, medical,
// cyber-security): relation types with their sentence templates, question
// patterns per hop chain, and the seeded synthetic name pools.
//
// Sentence templates are the single grammar shared by the corpus generator,
// the poison-text crafter and the deterministic extractor, which is what
// makes the round-trip (generate -> extract -> same triples) exact.
//
// Template placeholder conventions:
//   tmpl / neg_tmpl : "{A}" subject, "{B}" object, lowercase first letter,
//                     no trailing period
//   enh_tmpl        : "{S}" supporting entity, "{V}" injected entity;
//                     encodes the relation (V, type, S)
//   which_tmpl      : trailing clause "which ... {A}"; its subject is the
//                     object of the preceding clause
//   question texts  : "{anchor}"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "text.hpp"

namespace graglab {

enum class Domain { geographic, medical, cyber };

inline std::string domain_name(Domain d) {
    switch (d) {
        case Domain::geographic: return "geographic";
        case Domain::medical: return "medical";
        case Domain::cyber: return "cyber";
    }
    return "?";
}

inline std::optional<Domain> parse_domain(std::string_view s) {
    if (s == "geographic") return Domain::geographic;
    if (s == "medical") return Domain::medical;
    if (s == "cyber") return Domain::cyber;
    return std::nullopt;
}

struct RelationType {
    std::string id;            // stable identifier, used as the relation label
    std::string subject_kind;  // entity kind of {A}
    std::string object_kind;   // entity kind of {B}
    std::string tmpl;
    std::string neg_tmpl;
    std::string enh_tmpl;    // empty: fall back to the generic "assoc" type
    std::string which_tmpl;  // empty: type never used as a covering first hop
};

struct QuestionPattern {
    std::vector<std::string> type_ids;  // relation chain, anchor first
    std::vector<std::string> texts;     // texts[0] canonical, rest paraphrases
};

// Heads of the covering-narrative templates. "{D}" is the date token.
inline const std::vector<std::string>& narrative_heads() {
    static const std::vector<std::string> heads = {
        "After {D}, ",
        "At today {D}, ",
        "Now, at today {D}, ",
        "Currently, at today {D}, ",
        "Presently, at today {D}, ",
    };
    return heads;
}

inline constexpr std::string_view kTrustSuffixPrefix = "the trustworthiness of this paragraph is ";
inline constexpr std::string_view kChangeReasonPrefix = "this change occurs due to ";

struct DomainSchema {
    Domain domain;
    std::vector<RelationType> types;
    std::vector<QuestionPattern> patterns;

    const RelationType* find_type(std::string_view id) const {
        for (const auto& t : types)
            if (t.id == id) return &t;
        return nullptr;
    }
    const RelationType& type(std::string_view id) const {
        const RelationType* t = find_type(id);
        if (!t) throw std::runtime_error("unknown relation type: " + std::string(id));
        return *t;
    }
};

namespace detail {

inline std::string fill(std::string tmpl, std::string_view key, std::string_view value) {
    std::string pat = "{" + std::string(key) + "}";
    std::size_t pos;
    while ((pos = tmpl.find(pat)) != std::string::npos) tmpl.replace(pos, pat.size(), value);
    return tmpl;
}

}  // namespace detail

inline std::string fill_ab(const std::string& tmpl, std::string_view a, std::string_view b) {
    return detail::fill(detail::fill(tmpl, "A", a), "B", b);
}
inline std::string fill_sv(const std::string& tmpl, std::string_view s, std::string_view v) {
    return detail::fill(detail::fill(tmpl, "S", s), "V", v);
}
inline std::string fill_anchor(const std::string& tmpl, std::string_view anchor) {
    return detail::fill(tmpl, "anchor", anchor);
}

inline const DomainSchema& schema(Domain d) {
    static const DomainSchema geographic = {
        Domain::geographic,
        {
            {"capital", "country", "city",
             "the capital of {A} is {B}",
             "the capital of {A} is not {B}",
             "",
             "which is the capital of {A}"},
            {"attraction", "city", "landmark",
             "the most famous attraction in {A} is {B}",
             "the most famous attraction in {A} is not {B}",
             "{S} is the most famous attraction in {V}",
             "which is the most famous attraction in {A}"},
            {"tallest", "city", "landmark",
             "the tallest building in {A} is {B}",
             "the tallest building in {A} is not {B}",
             "{S} is the tallest building in {V}",
             ""},
            {"patronage", "landmark", "figure",
             "the patronage of {A} is {B}",
             "the patronage of {A} is not {B}",
             "{S} is the patronage of {V}",
             ""},
            {"assoc", "any", "any",
             "{A} is closely associated with {B}",
             "{A} is not closely associated with {B}",
             "{S} is closely associated with {V}",
             ""},
        },
        {
            {{"capital"},
             {"What is the capital of {anchor}?",
              "Which city is the capital of {anchor}?",
              "Name the capital of {anchor}.",
              "The capital of {anchor} is which city?"}},
            {{"capital", "attraction"},
             {"What is the most famous attraction in the capital of {anchor}?",
              "Which attraction is the most famous in the capital of {anchor}?",
              "Name the most famous attraction in the capital of {anchor}.",
              "The capital of {anchor} hosts which most famous attraction?"}},
            {{"capital", "tallest"},
             {"What is the tallest building in the capital of {anchor}?",
              "Which building is the tallest in the capital of {anchor}?",
              "Name the tallest building in the capital of {anchor}.",
              "The capital of {anchor} hosts which tallest building?"}},
            {{"capital", "attraction", "patronage"},
             {"What is the patronage of the most famous attraction in the capital of {anchor}?",
              "Which patronage does the most famous attraction in the capital of {anchor} have?",
              "Name the patronage of the most famous attraction in the capital of {anchor}."}},
        },
    };

    static const DomainSchema medical = {
        Domain::medical,
        {
            {"treats", "medicine", "disease",
             "the compound named {A} can treat {B}",
             "the compound named {A} can not treat {B}",
             "",
             "which can be treated by the compound named {A}"},
            {"symptom", "disease", "symptom",
             "{A} presents the symptom {B}",
             "{A} does not present the symptom {B}",
             "the symptom {S} is presented by {V}",
             ""},
            {"localizes", "disease", "location",
             "{A} localizes at the {B} of the human body",
             "{A} does not localize at the {B} of the human body",
             "{S} is the anatomical location of {V}",
             ""},
            {"sideeffect", "medicine", "sideeffect",
             "the compound named {A} has side effect {B}",
             "the compound named {A} does not have side effect {B}",
             "{S} is a side effect of {V}",
             ""},
            {"assoc", "any", "any",
             "{A} is closely associated with {B}",
             "{A} is not closely associated with {B}",
             "{S} is closely associated with {V}",
             ""},
        },
        {
            {{"treats"},
             {"Which disease can the compound named {anchor} treat?",
              "What disease is treated by the compound named {anchor}?",
              "Name the disease that the compound named {anchor} can treat."}},
            {{"treats", "symptom"},
             {"What symptom is presented by the disease treated by the compound named {anchor}?",
              "Which symptom does the disease treated by the compound named {anchor} present?",
              "Name the symptom presented by the disease treated by the compound named {anchor}."}},
            {{"treats", "localizes"},
             {"Where in the human body does the disease treated by the compound named {anchor} localize?",
              "Which part of the human body does the disease treated by the compound named {anchor} localize at?",
              "Name the part of the human body where the disease treated by the compound named {anchor} localizes."}},
        },
    };

    static const DomainSchema cyber = {
        Domain::cyber,
        {
            {"utilizes", "malware", "technique",
             "the malware {A} utilizes {B}",
             "the malware {A} does not utilize {B}",
             "",
             "which is utilized by the malware {A}"},
            {"mitigated", "technique", "mitigation",
             "{A} can be mitigated by {B}",
             "{A} can not be mitigated by {B}",
             "{S} can mitigate {V}",
             ""},
            {"detected", "technique", "detection",
             "{A} can be detected by {B}",
             "{A} can not be detected by {B}",
             "{S} can detect {V}",
             ""},
            {"assoc", "any", "any",
             "{A} is closely associated with {B}",
             "{A} is not closely associated with {B}",
             "{S} is closely associated with {V}",
             ""},
        },
        {
            {{"utilizes"},
             {"What attack technique does the malware {anchor} utilize?",
              "Which attack technique is utilized by the malware {anchor}?",
              "Name the attack technique that the malware {anchor} utilizes."}},
            {{"utilizes", "mitigated"},
             {"How can the malware {anchor} be mitigated?",
              "Which mitigation method can mitigate the malware {anchor}?",
              "What is the way to mitigate the malware {anchor}?",
              "How to mitigate the malware {anchor}?"}},
            {{"utilizes", "detected"},
             {"How can the malware {anchor} be detected?",
              "Which detection method can detect the malware {anchor}?",
              "What is the way to detect the malware {anchor}?",
              "How to detect the malware {anchor}?"}},
        },
    };

    switch (d) {
        case Domain::geographic: return geographic;
        case Domain::medical: return medical;
        case Domain::cyber: return cyber;
    }
    throw std::runtime_error("bad domain");
}

// ---------------------------------------------------------------------------
// Question parsing (shared by the deterministic generator, the KG-agnostic
// inference mock path and the paraphrase defense).

struct ParsedQuestion {
    const QuestionPattern* pattern = nullptr;
    std::size_t variant = 0;
    std::string anchor;  // canonical
};

inline std::optional<ParsedQuestion> parse_question(const DomainSchema& sch, std::string_view question) {
    std::optional<ParsedQuestion> best;
    std::size_t best_len = 0;
    std::string orig = trim(question);
    std::string q = to_lower(orig);
    for (const auto& pat : sch.patterns) {
        for (std::size_t vi = 0; vi < pat.texts.size(); ++vi) {
            const std::string& t = pat.texts[vi];
            std::size_t slot = t.find("{anchor}");
            if (slot == std::string::npos) continue;
            std::string prefix = to_lower(t.substr(0, slot));
            std::string suffix = to_lower(t.substr(slot + 8));
            if (q.size() <= prefix.size() + suffix.size()) continue;
            if (q.compare(0, prefix.size(), prefix) != 0) continue;
            if (q.compare(q.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
            std::size_t lit = prefix.size() + suffix.size();
            if (lit <= best_len) continue;
            best_len = lit;
            ParsedQuestion p;
            p.pattern = &pat;
            p.variant = vi;
            p.anchor = canonical_name(
                std::string_view(orig).substr(prefix.size(), q.size() - lit));
            best = p;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Seeded synthetic name pools. The paper samples real corpora; desk scale
// substitutes deterministic names so runs are reproducible offline.

namespace detail {

inline const char* kSyllables[24] = {
    "bal", "cor", "dun", "fen", "gol", "har", "jor", "kel",
    "mor", "nal", "por", "quil", "ros", "sel", "tor", "vel",
    "wex", "yor", "zan", "bru", "cla", "dri", "fos", "gri"};

inline std::string base_name(std::uint64_t seed, std::string_view kind, std::size_t index) {
    // Per-(seed, kind) permutation offset so different corpora differ.
    std::uint64_t h = stable_hash(kind, seed);
    std::size_t i = index + static_cast<std::size_t>(h % 576);
    std::string s = std::string(kSyllables[i % 24]) + kSyllables[(i / 24) % 24];
    if (index >= 576) s += std::to_string(index / 576);
    return s;
}

}  // namespace detail

inline std::string pool_name(std::uint64_t seed, std::string_view kind, std::size_t index) {
    static const std::map<std::string, std::string, std::less<>> suffix = {
        {"country", "land"},  {"city", "ville"},    {"landmark", "spire"},
        {"disease", "osis"},  {"symptom", "algia"}, {"location", "plexus"},
        {"medicine", "zumab"}, {"sideeffect", "emia"},
        {"malware", "worm"},  {"technique", "jection"},
        {"mitigation", "guard"}, {"detection", "scan"},
        {"support", "crest"}, {"generic", "node"},
    };
    if (kind == "figure")
        return std::to_string(3 + index) + " million annually";
    auto it = suffix.find(kind);
    std::string suf = it == suffix.end() ? std::string("ite") : it->second;
    return capitalize(detail::base_name(seed, kind, index) + suf);
}

}  // namespace graglab
