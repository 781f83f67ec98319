#pragma once
// Defenses: query paraphrasing over registered variants, prior-knowledge
// referencing (a generation-policy toggle), chain-of-thought consistency
// across jitter seeds, character-bigram perplexity detection with exact
// ROC/AUC, and provenance trust scoring.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "domain.hpp"
#include "generation.hpp"
#include "record_io.hpp"

namespace graglab {

// ---------------------------------------------------------------------------
// Query paraphrasing: swap the question for a different registered variant
// of the same pattern. Returns nullopt when the question is unrecognized or
// has no alternates.
inline std::optional<std::string> paraphrase_question(const DomainSchema& sch,
                                                      std::string_view question,
                                                      std::size_t alternate = 0) {
    std::optional<ParsedQuestion> pq = parse_question(sch, question);
    if (!pq || pq->pattern->texts.size() < 2) return std::nullopt;
    std::size_t n = pq->pattern->texts.size();
    std::size_t pick = (pq->variant + 1 + alternate % (n - 1)) % n;
    if (pick == pq->variant) pick = (pick + 1) % n;
    return fill_anchor(pq->pattern->texts[pick], pq->anchor);
}

// ---------------------------------------------------------------------------
// Chain-of-thought consistency: regenerate under several jitter seeds and
// flag the query when the reasoning traces disagree.

struct CotReport {
    bool flagged = false;
    std::vector<std::vector<std::string>> traces;  // one per seed
};

inline CotReport cot_consistency(Generator& gen, std::string_view question,
                                 const RetrievedContext& ctx, GenerationPolicy policy,
                                 const std::vector<std::uint64_t>& seeds = {11, 22, 33}) {
    if (seeds.size() < 2) throw ConfigError("cot_consistency needs at least two jitter seeds");
    CotReport rep;
    for (std::uint64_t s : seeds) {
        policy.jitter_seed = s;
        rep.traces.push_back(gen.generate(question, ctx, policy).trace);
    }
    for (std::size_t i = 1; i < rep.traces.size(); ++i)
        if (rep.traces[i] != rep.traces.front()) rep.flagged = true;
    return rep;
}

// ---------------------------------------------------------------------------
// Perplexity detection: a Laplace-smoothed character-bigram model trained
// on reference text; the score is the average negative log2 likelihood per
// transition, higher meaning less like the reference.

class CharBigramScorer {
public:
    void train(std::string_view text) {
        unsigned char prev = 0;
        for (char ch : text) {
            unsigned char c = static_cast<unsigned char>(ch);
            ++counts_[prev][c];
            ++totals_[prev];
            prev = c;
        }
        trained_ = true;
    }

    void train(const std::vector<std::string>& texts) {
        for (const auto& t : texts) train(t);
    }

    double score(std::string_view text) const {
        if (!trained_) throw ConfigError("perplexity scorer used before training");
        if (text.empty()) return 0.0;
        double nll = 0.0;
        std::size_t n = 0;
        unsigned char prev = 0;
        for (char ch : text) {
            unsigned char c = static_cast<unsigned char>(ch);
            double p = (counts_[prev][c] + 1.0) / (totals_[prev] + 256.0);
            nll -= std::log2(p);
            ++n;
            prev = c;
        }
        return nll / static_cast<double>(n);
    }

private:
    std::array<std::array<std::uint32_t, 256>, 256> counts_{};
    std::array<std::uint64_t, 256> totals_{};
    bool trained_ = false;
};

// Exact AUC by pairwise comparison (Mann-Whitney); ties count one half.
// Positive scores are expected to be higher. Throws when either class is
// empty, since the curve is undefined with a single class.
inline double auc(const std::vector<double>& positives, const std::vector<double>& negatives) {
    if (positives.empty() || negatives.empty())
        throw ConfigError("AUC undefined: both classes must be non-empty");
    double wins = 0.0;
    for (double p : positives)
        for (double n : negatives) {
            if (p > n) wins += 1.0;
            else if (p == n) wins += 0.5;
        }
    return wins / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

// ROC points (FPR, TPR) swept over every distinct score threshold,
// including the (0,0) and (1,1) endpoints.
inline std::vector<std::pair<double, double>> roc_points(const std::vector<double>& positives,
                                                         const std::vector<double>& negatives) {
    if (positives.empty() || negatives.empty())
        throw ConfigError("ROC undefined: both classes must be non-empty");
    std::vector<double> thresholds;
    thresholds.insert(thresholds.end(), positives.begin(), positives.end());
    thresholds.insert(thresholds.end(), negatives.begin(), negatives.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::vector<std::pair<double, double>> out{{0.0, 0.0}};
    for (double th : thresholds) {
        double tp = 0, fp = 0;
        for (double p : positives) tp += p >= th ? 1 : 0;
        for (double n : negatives) fp += n >= th ? 1 : 0;
        out.emplace_back(fp / static_cast<double>(negatives.size()),
                         tp / static_cast<double>(positives.size()));
    }
    if (out.back() != std::make_pair(1.0, 1.0)) out.emplace_back(1.0, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Provenance trust scoring: the source-reputation rule becomes per-document
// trust (see annotate_trust), which the generator consumes when the policy
// enables trust. Default rule: curated sources high, unvetted uploads low.
inline std::map<std::string, int> default_trust_rule() {
    return {{"clean", 5}, {"poison", 3}};
}

// ---------------------------------------------------------------------------
// Detection report persistence

struct DetectionOutcome {
    std::string id;      // query or document id
    double score = 0.0;  // detector-specific
    bool flagged = false;
};

inline void save_detections(const std::string& path, std::string_view detector,
                            const std::vector<DetectionOutcome>& outcomes) {
    std::vector<Record> recs;
    for (const auto& o : outcomes) {
        Record r;
        r.kind = "detection";
        r.set("detector", std::string(detector));
        r.set("id", o.id);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", o.score);
        r.set("score", buf);
        r.set("flagged", o.flagged ? "1" : "0");
        recs.push_back(std::move(r));
    }
    write_records(path, recs);
}

inline std::vector<DetectionOutcome> load_detections(const std::string& path) {
    std::vector<DetectionOutcome> out;
    for (const auto& rec : read_records(path)) {
        if (rec.kind != "detection") continue;
        out.push_back({rec.get("id"), rec.get_real("score"), rec.get("flagged") == "1"});
    }
    return out;
}

}  // namespace graglab
