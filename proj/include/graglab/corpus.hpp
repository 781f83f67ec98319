#pragma once
// Template corpora and queries: documents with provenance tags, the three
// domain corpus generators, trust annotation, corpus-volume scaling, and the
// on-disk corpus / query formats.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "domain.hpp"
#include "record_io.hpp"
#include "rng.hpp"
#include "text.hpp"

namespace graglab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Document {
    std::string id;
    std::string text;
    std::string source_tag;         // "clean", "poison", ...
    std::optional<int> trust;       // 1..5 when annotated

    void validate() const {
        if (text.empty()) throw ConfigError("document " + id + ": empty text");
        if (trust && (*trust < 1 || *trust > 5))
            throw ConfigError("document " + id + ": trust out of [1,5]");
    }
};

struct Triple {
    std::string subject;  // canonical
    std::string type_id;  // relation type / label
    std::string object;   // canonical

    auto key() const { return std::tie(subject, type_id, object); }
    friend bool operator==(const Triple& a, const Triple& b) { return a.key() == b.key(); }
    friend bool operator<(const Triple& a, const Triple& b) { return a.key() < b.key(); }
};

struct DomainSpec {
    Domain domain = Domain::cyber;
    std::map<std::string, int> entity_counts;            // per entity kind
    std::map<std::string, std::pair<int, int>> branching;  // per relation type, fan-out range
    std::uint64_t seed = 0;

    int count(const std::string& kind) const {
        auto it = entity_counts.find(kind);
        return it == entity_counts.end() ? 0 : it->second;
    }
    std::pair<int, int> fanout(const std::string& type_id, int dflt = 1) const {
        auto it = branching.find(type_id);
        return it == branching.end() ? std::pair<int, int>{dflt, dflt} : it->second;
    }
    void validate() const {
        for (const auto& [k, v] : entity_counts)
            if (v < 0) throw ConfigError("negative entity count for kind '" + k + "'");
        for (const auto& [k, v] : branching)
            if (v.first < 0 || v.second < v.first)
                throw ConfigError("bad fan-out range for relation '" + k + "'");
    }
};

inline DomainSpec default_spec(Domain d, std::uint64_t seed = 1) {
    DomainSpec s;
    s.domain = d;
    s.seed = seed;
    switch (d) {
        case Domain::geographic:
            s.entity_counts = {{"country", 12}, {"city", 12}, {"landmark", 24}, {"figure", 24}};
            break;
        case Domain::medical:
            s.entity_counts = {{"disease", 12}, {"medicine", 12}, {"symptom", 24},
                               {"location", 12}, {"sideeffect", 12}};
            s.branching = {{"symptom", {1, 2}}, {"localizes", {1, 1}}, {"sideeffect", {1, 2}}};
            break;
        case Domain::cyber:
            s.entity_counts = {{"malware", 12}, {"technique", 12}, {"mitigation", 12},
                               {"detection", 12}};
            s.branching = {{"utilizes", {1, 1}}, {"mitigated", {1, 1}}, {"detected", {1, 1}}};
            break;
    }
    return s;
}

struct Query {
    std::string id;
    std::string text;
    std::string anchor_entity;          // canonical
    std::vector<Triple> gold_path;      // ordered hops
    std::string gold_answer;            // canonical, terminal object
    int hop_count = 0;

    void validate() const {
        if (gold_path.empty() || hop_count != static_cast<int>(gold_path.size()))
            throw ConfigError("query " + id + ": hop_count/path mismatch");
        if (gold_answer != gold_path.back().object)
            throw ConfigError("query " + id + ": gold_answer is not the terminal object");
    }
};

// ---------------------------------------------------------------------------
// Template corpus generation

struct TemplateCorpus {
    std::vector<Document> documents;
    std::vector<Triple> gold_triples;
};

namespace detail {

struct CorpusBuilder {
    const DomainSpec& spec;
    const DomainSchema& sch;
    Rng rng;
    TemplateCorpus out;
    std::vector<std::string> sentences;  // current document

    CorpusBuilder(const DomainSpec& s)
        : spec(s), sch(schema(s.domain)), rng(s.seed) {}

    std::string name(const std::string& kind, int index) {
        return pool_name(spec.seed, kind, static_cast<std::size_t>(index));
    }

    void relate(const std::string& type_id, const std::string& subj, const std::string& obj) {
        const RelationType& t = sch.type(type_id);
        sentences.push_back(capitalize(fill_ab(t.tmpl, subj, obj)) + ".");
        out.gold_triples.push_back({canonical_name(subj), type_id, canonical_name(obj)});
    }

    void flush(const std::string& doc_id) {
        if (sentences.empty()) return;
        std::string text;
        for (const auto& s : sentences) {
            if (!text.empty()) text += ' ';
            text += s;
        }
        out.documents.push_back({doc_id, text, "clean", std::nullopt});
        sentences.clear();
    }

    int fanout(const std::string& type_id) {
        auto [lo, hi] = spec.fanout(type_id);
        return rng.range(lo, hi);
    }
};

inline void build_geographic(CorpusBuilder& b) {
    const DomainSpec& sp = b.spec;
    int countries = sp.count("country");
    int cities = sp.count("city");
    int landmarks = sp.count("landmark");
    int figures = sp.count("figure");
    for (int i = 0; i < countries; ++i) {
        if (cities == 0) break;
        std::string country = b.name("country", i);
        std::string city = b.name("city", i % cities);
        b.relate("capital", country, city);
        if (landmarks > 0) {
            std::string attraction = b.name("landmark", (2 * i) % landmarks);
            b.relate("attraction", city, attraction);
            if (figures > 0)
                b.relate("patronage", attraction, b.name("figure", (2 * i) % figures));
            std::string tallest = b.name("landmark", (2 * i + 1) % landmarks);
            if (tallest != attraction) b.relate("tallest", city, tallest);
        }
        b.flush("geo-" + std::to_string(i));
    }
}

inline void build_medical(CorpusBuilder& b) {
    const DomainSpec& sp = b.spec;
    int diseases = sp.count("disease");
    int medicines = sp.count("medicine");
    int symptoms = sp.count("symptom");
    int locations = sp.count("location");
    int sideeffects = sp.count("sideeffect");
    for (int i = 0; i < diseases; ++i) {
        std::string disease = b.name("disease", i);
        b.sentences.push_back(capitalize(disease) + " is the name of a kind of disease.");
        int ns = symptoms > 0 ? b.fanout("symptom") : 0;
        for (int j = 0; j < ns; ++j)
            b.relate("symptom", disease, b.name("symptom", (2 * i + j) % symptoms));
        int nl = locations > 0 ? b.fanout("localizes") : 0;
        for (int j = 0; j < nl; ++j)
            b.relate("localizes", disease, b.name("location", (i + j) % locations));
        if (medicines > 0) {
            std::string medicine = b.name("medicine", i % medicines);
            b.relate("treats", medicine, disease);
            int ne = sideeffects > 0 ? b.fanout("sideeffect") : 0;
            for (int j = 0; j < ne; ++j)
                b.relate("sideeffect", medicine, b.name("sideeffect", (i + j) % sideeffects));
        }
        b.flush("med-" + std::to_string(i));
    }
}

inline void build_cyber(CorpusBuilder& b) {
    const DomainSpec& sp = b.spec;
    int malware = sp.count("malware");
    int techniques = sp.count("technique");
    int mitigations = sp.count("mitigation");
    int detections = sp.count("detection");
    std::set<int> used_techniques;
    for (int i = 0; i < malware; ++i) {
        if (techniques == 0) break;
        std::string mw = b.name("malware", i);
        int nu = b.fanout("utilizes");
        for (int j = 0; j < nu; ++j) {
            int t = (i + j) % techniques;
            b.relate("utilizes", mw, b.name("technique", t));
            used_techniques.insert(t);
        }
        b.flush("cyb-mw-" + std::to_string(i));
    }
    for (int t : used_techniques) {
        std::string tech = b.name("technique", t);
        int nm = mitigations > 0 ? b.fanout("mitigated") : 0;
        for (int j = 0; j < nm; ++j)
            b.relate("mitigated", tech, b.name("mitigation", (t + j) % mitigations));
        int nd = detections > 0 ? b.fanout("detected") : 0;
        for (int j = 0; j < nd; ++j)
            b.relate("detected", tech, b.name("detection", (t + j) % detections));
        b.flush("cyb-tech-" + std::to_string(t));
    }
}

}  // namespace detail

inline TemplateCorpus build_template_corpus(const DomainSpec& spec) {
    spec.validate();
    detail::CorpusBuilder b(spec);
    switch (spec.domain) {
        case Domain::geographic: detail::build_geographic(b); break;
        case Domain::medical: detail::build_medical(b); break;
        case Domain::cyber: detail::build_cyber(b); break;
    }
    // De-duplicate triples that template sharing may repeat.
    std::sort(b.out.gold_triples.begin(), b.out.gold_triples.end());
    b.out.gold_triples.erase(std::unique(b.out.gold_triples.begin(), b.out.gold_triples.end()),
                             b.out.gold_triples.end());
    return std::move(b.out);
}

// ---------------------------------------------------------------------------
// Trust annotation (provenance scoring hook, see the defense module)

inline std::vector<Document> annotate_trust(
    std::vector<Document> documents, const std::map<std::string, int>& rule) {
    std::set<std::string> uncovered;
    for (const auto& d : documents)
        if (!rule.count(d.source_tag)) uncovered.insert(d.source_tag);
    if (!uncovered.empty()) {
        std::string msg = "trust rule misses source tags:";
        for (const auto& t : uncovered) msg += " '" + t + "'";
        throw ConfigError(msg);
    }
    for (auto& d : documents) {
        int score = rule.at(d.source_tag);
        if (score < 1 || score > 5) throw ConfigError("trust score out of [1,5]");
        d.trust = score;
        d.text += " The trustworthiness of this paragraph is " + std::to_string(score) + "/5.";
    }
    return documents;
}

// Corpus-volume scaling: seeded shuffle, then keep the first fraction.
inline std::vector<Document> scale_corpus(std::vector<Document> documents, double fraction,
                                          std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) throw ConfigError("corpus fraction outside [0,1]");
    Rng rng(seed ^ 0x5ca1ab1eull);
    rng.shuffle(documents);
    std::size_t keep = static_cast<std::size_t>(fraction * static_cast<double>(documents.size()) + 0.5);
    documents.resize(std::min(keep, documents.size()));
    return documents;
}

// ---------------------------------------------------------------------------
// Corpus directory format: one .txt per document + manifest.tsv sidecar.

inline void save_corpus(const std::string& dir, const std::vector<Document>& documents) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<Record> manifest;
    for (const auto& d : documents) {
        d.validate();
        std::ofstream out(fs::path(dir) / (d.id + ".txt"), std::ios::binary);
        if (!out) throw std::runtime_error("cannot write document " + d.id);
        out << d.text;
        Record rec;
        rec.kind = "document";
        rec.set("id", d.id);
        rec.set("source_tag", d.source_tag);
        if (d.trust) rec.set("trust", static_cast<long long>(*d.trust));
        manifest.push_back(std::move(rec));
    }
    write_records((fs::path(dir) / "manifest.tsv").string(), manifest);
}

inline std::vector<Document> load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<Document> docs;
    for (const auto& rec : read_records((fs::path(dir) / "manifest.tsv").string())) {
        if (rec.kind != "document") continue;
        Document d;
        d.id = rec.get("id");
        d.source_tag = rec.get("source_tag");
        if (const std::string* t = rec.find("trust")) d.trust = std::stoi(*t);
        std::ifstream in(fs::path(dir) / (d.id + ".txt"), std::ios::binary);
        if (!in) throw std::runtime_error("missing document file " + d.id + ".txt");
        d.text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        d.validate();
        docs.push_back(std::move(d));
    }
    return docs;
}

// ---------------------------------------------------------------------------
// Query file format

inline std::vector<Record> queries_to_records(const std::vector<Query>& queries) {
    std::vector<Record> out;
    for (const auto& q : queries) {
        Record rec;
        rec.kind = "query";
        rec.set("id", q.id);
        rec.set("text", q.text);
        rec.set("anchor", q.anchor_entity);
        rec.set("answer", q.gold_answer);
        rec.set("hops", q.hop_count);
        std::string path;
        for (const auto& t : q.gold_path) {
            if (!path.empty()) path += '|';
            path += t.subject + ";" + t.type_id + ";" + t.object;
        }
        rec.set("path", path);
        out.push_back(std::move(rec));
    }
    return out;
}

inline Query query_from_record(const Record& rec) {
    Query q;
    q.id = rec.get("id");
    q.text = rec.get("text");
    q.anchor_entity = rec.get("anchor");
    q.gold_answer = rec.get("answer");
    q.hop_count = static_cast<int>(rec.get_int("hops"));
    std::string path = rec.get("path");
    std::size_t pos = 0;
    while (pos <= path.size() && !path.empty()) {
        std::size_t bar = path.find('|', pos);
        std::string hop = path.substr(pos, bar == std::string::npos ? bar : bar - pos);
        std::size_t s1 = hop.find(';');
        std::size_t s2 = hop.find(';', s1 + 1);
        if (s1 == std::string::npos || s2 == std::string::npos)
            throw std::runtime_error("query " + q.id + ": malformed path hop");
        q.gold_path.push_back({hop.substr(0, s1), hop.substr(s1 + 1, s2 - s1 - 1), hop.substr(s2 + 1)});
        if (bar == std::string::npos) break;
        pos = bar + 1;
    }
    q.validate();
    return q;
}

inline void save_queries(const std::string& path, const std::vector<Query>& queries) {
    write_records(path, queries_to_records(queries));
}

inline std::vector<Query> load_queries(const std::string& path) {
    std::vector<Query> out;
    for (const auto& rec : read_records(path))
        if (rec.kind == "query") out.push_back(query_from_record(rec));
    return out;
}

}  // namespace graglab
