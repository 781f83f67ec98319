#pragma once
// Entity/relation extraction. The provider contract is a single virtual;
// the deterministic implementation inverts the template grammar exactly:
// domain sentence templates, their negated forms, the covering-narrative
// heads ("After DATE, ... anymore; instead, ..."), enhancement phrasings,
// "which ..." clauses and the trust suffix.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domain.hpp"
#include "rng.hpp"
#include "text.hpp"

namespace graglab {

struct ExtractedEntity {
    std::string name;        // canonical
    std::string type_label;  // entity kind, may be empty
    std::string description; // the sentence the mention came from
};

struct ExtractedRelation {
    std::string subject;  // canonical
    std::string object;   // canonical
    std::string type_id;
    std::string description;
    std::optional<Date> temporal_marker;
    bool negation = false;              // true: asserts the relation does NOT hold
    std::string negated_object;         // on a positive relation: object of the
                                        // clean relation this one supersedes
};

struct ExtractionFragment {
    std::vector<ExtractedEntity> entities;
    std::vector<ExtractedRelation> relations;
    std::size_t skipped = 0;  // sentences no pattern matched
};

class Extractor {
public:
    virtual ~Extractor() = default;
    virtual ExtractionFragment extract(std::string_view chunk_text) = 0;
};

namespace detail {

// A template compiled to alternating literal segments and capture slots.
struct Pattern {
    std::vector<std::string> literals;  // lowercase; literals.size() == slots + 1
    std::vector<std::string> slots;     // placeholder names in order

    static Pattern compile(std::string_view tmpl) {
        Pattern p;
        std::string lit;
        for (std::size_t i = 0; i < tmpl.size();) {
            if (tmpl[i] == '{') {
                std::size_t close = tmpl.find('}', i);
                p.literals.push_back(to_lower(lit));
                lit.clear();
                p.slots.push_back(std::string(tmpl.substr(i + 1, close - i - 1)));
                i = close + 1;
            } else {
                lit.push_back(tmpl[i++]);
            }
        }
        p.literals.push_back(to_lower(lit));
        return p;
    }

    // Case-insensitive match over the whole input; captures must be non-empty.
    std::optional<std::vector<std::string>> match(std::string_view input) const {
        std::string low = to_lower(input);
        std::vector<std::string> caps;
        std::size_t pos = 0;
        if (!literals.front().empty()) {
            if (low.compare(0, literals.front().size(), literals.front()) != 0) return std::nullopt;
            pos = literals.front().size();
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const std::string& next = literals[i + 1];
            std::size_t end;
            if (next.empty()) {
                if (i + 1 != slots.size()) return std::nullopt;  // inner empty literal
                end = low.size();
            } else if (i + 1 == slots.size()) {
                // last literal must sit at the very end
                if (low.size() < pos + next.size()) return std::nullopt;
                end = low.size() - next.size();
                if (low.compare(end, next.size(), next) != 0) return std::nullopt;
            } else {
                end = low.find(next, pos);
                if (end == std::string_view::npos) return std::nullopt;
            }
            if (end <= pos) return std::nullopt;
            caps.emplace_back(trim(input.substr(pos, end - pos)));
            pos = end + next.size();
        }
        if (pos != low.size()) return std::nullopt;
        return caps;
    }
};

}  // namespace detail

// Deterministic extractor over the fixed pattern grammar of one domain.
class PatternExtractor : public Extractor {
public:
    explicit PatternExtractor(Domain domain, double skip_probability = 0.0,
                              std::uint64_t seed = 0)
        : sch_(schema(domain)), skip_probability_(skip_probability), rng_(seed) {
        for (const auto& t : sch_.types) {
            if (!t.neg_tmpl.empty()) neg_.push_back({&t, detail::Pattern::compile(t.neg_tmpl)});
            pos_.push_back({&t, detail::Pattern::compile(t.tmpl)});
            if (!t.enh_tmpl.empty() && t.enh_tmpl != t.tmpl)
                enh_.push_back({&t, detail::Pattern::compile(t.enh_tmpl)});
            if (!t.which_tmpl.empty()) which_.push_back({&t, detail::Pattern::compile(t.which_tmpl)});
        }
        for (const auto& head : narrative_heads())
            heads_.push_back(detail::Pattern::compile(head + "{rest}"));
        trust_ = detail::Pattern::compile(std::string(kTrustSuffixPrefix) + "{N}/5");
        reason_ = detail::Pattern::compile(std::string(kChangeReasonPrefix) + "{X}");
        reason2_ = detail::Pattern::compile("this change is due to {X}");
        typing_ = detail::Pattern::compile("{A} is the name of a kind of disease");
    }

    ExtractionFragment extract(std::string_view chunk_text) override {
        ExtractionFragment frag;
        for (const std::string& raw : split_sentences(chunk_text)) {
            std::string sentence = trim(raw);
            if (sentence.empty()) continue;
            if (skip_probability_ > 0.0 && rng_.real01() < skip_probability_) {
                ++frag.skipped;
                continue;
            }
            if (!parse_sentence(sentence, frag)) ++frag.skipped;
        }
        return frag;
    }

private:
    using TypedPattern = std::pair<const RelationType*, detail::Pattern>;

    bool parse_sentence(const std::string& sentence_full, ExtractionFragment& frag) {
        std::string body = sentence_full;
        while (!body.empty() && (body.back() == '.' || body.back() == '!' || body.back() == '?'))
            body.pop_back();
        body = trim(body);
        if (body.empty()) return true;

        if (trust_.match(body) || reason_.match(body) || reason2_.match(body)) return true;
        if (auto caps = typing_.match(body)) {
            add_entity(frag, (*caps)[0], "disease", sentence_full);
            return true;
        }

        std::optional<Date> date;
        for (const auto& head : heads_) {
            if (auto caps = head.match(body)) {
                if (auto d = Date::parse((*caps)[0])) {
                    date = d;
                    body = (*caps)[1];
                    break;
                }
            }
        }

        // Clauses of a covering narrative: "<neg> anymore; instead, <pos>".
        std::vector<std::string> clauses;
        std::string low = to_lower(body);
        std::size_t split = low.find("; instead, ");
        if (split != std::string::npos) {
            clauses.push_back(trim(body.substr(0, split)));
            clauses.push_back(trim(body.substr(split + 11)));
        } else {
            clauses.push_back(body);
        }

        bool any = false;
        std::string pending_negated_object;  // from a preceding negated clause
        for (std::string clause : clauses) {
            // strip trailing " anymore"
            std::string cl = to_lower(clause);
            if (cl.size() > 8 && cl.compare(cl.size() - 8, 8, " anymore") == 0)
                clause = trim(clause.substr(0, clause.size() - 8));

            // split off a trailing "which ..." clause
            std::string which_part;
            std::size_t wp = to_lower(clause).find(", which ");
            if (wp != std::string::npos) {
                which_part = trim(clause.substr(wp + 2));
                clause = trim(clause.substr(0, wp));
            }

            std::string referent;  // entity a "which" clause attaches to
            bool matched = false;
            for (const auto& [type, pat] : neg_) {
                if (auto caps = pat.match(clause)) {
                    ExtractedRelation rel;
                    rel.subject = canonical_name((*caps)[0]);
                    rel.object = canonical_name((*caps)[1]);
                    rel.type_id = type->id;
                    rel.description = sentence_full;
                    rel.temporal_marker = date;
                    rel.negation = true;
                    pending_negated_object = rel.object;
                    referent = rel.object;
                    add_entity(frag, (*caps)[0], type->subject_kind, sentence_full);
                    add_entity(frag, (*caps)[1], type->object_kind, sentence_full);
                    frag.relations.push_back(std::move(rel));
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                for (const auto& [type, pat] : pos_) {
                    if (auto caps = pat.match(clause)) {
                        referent = emit_positive(frag, *type, (*caps)[0], (*caps)[1], sentence_full,
                                                 date, pending_negated_object);
                        pending_negated_object.clear();
                        matched = true;
                        break;
                    }
                }
            }
            if (!matched) {
                for (const auto& [type, pat] : enh_) {
                    if (auto caps = pat.match(clause)) {
                        // enh template captures (S, V) in template order; map by name
                        std::string s_cap, v_cap;
                        const detail::Pattern& p = pat;
                        for (std::size_t i = 0; i < p.slots.size(); ++i)
                            (p.slots[i] == "S" ? s_cap : v_cap) = (*caps)[i];
                        referent = emit_positive(frag, *type, v_cap, s_cap, sentence_full, date, {});
                        referent = canonical_name(v_cap);  // "which" refers to the injected entity
                        matched = true;
                        break;
                    }
                }
            }
            if (!matched) return false;
            any = true;

            if (!which_part.empty() && !referent.empty()) {
                bool which_ok = false;
                for (const auto& [type, pat] : which_) {
                    if (auto caps = pat.match(which_part)) {
                        emit_positive(frag, *type, (*caps)[0], referent, sentence_full, std::nullopt, {});
                        which_ok = true;
                        break;
                    }
                }
                if (!which_ok) return false;
            }
        }
        return any;
    }

    // Returns the relation object (the entity a following "which" refers to).
    std::string emit_positive(ExtractionFragment& frag, const RelationType& type,
                              std::string_view subj, std::string_view obj,
                              const std::string& sentence, std::optional<Date> date,
                              std::string negated_object) {
        ExtractedRelation rel;
        rel.subject = canonical_name(subj);
        rel.object = canonical_name(obj);
        rel.type_id = type.id;
        rel.description = sentence;
        rel.temporal_marker = date;
        rel.negated_object = std::move(negated_object);
        add_entity(frag, subj, type.subject_kind, sentence);
        add_entity(frag, obj, type.object_kind, sentence);
        std::string referent = rel.object;
        frag.relations.push_back(std::move(rel));
        return referent;
    }

    void add_entity(ExtractionFragment& frag, std::string_view name, std::string kind,
                    const std::string& sentence) {
        ExtractedEntity e;
        e.name = canonical_name(name);
        e.type_label = kind == "any" ? std::string() : std::move(kind);
        e.description = sentence;
        frag.entities.push_back(std::move(e));
    }

    const DomainSchema& sch_;
    std::vector<TypedPattern> neg_, pos_, enh_, which_;
    std::vector<detail::Pattern> heads_;
    detail::Pattern trust_, reason_, reason2_, typing_;
    double skip_probability_;
    Rng rng_;
};

}  // namespace graglab
