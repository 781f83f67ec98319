#pragma once
// Embedding provider contract plus the deterministic implementation: a
// hashed bag-of-words vector (FNV-1a bucketing, L2-normalized). Entities
// that share tokens score high under cosine, which is all entity selection
// needs, and the vectors are bit-identical across platforms.

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "text.hpp"

namespace graglab {

using Embedding = std::vector<double>;

inline double cosine(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size() || a.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;  // empty text embeds to zero
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Embedding embed(std::string_view text) = 0;
};

// Function words carry no entity signal and would otherwise dominate the
// bag-of-words inner product between template sentences.
inline bool is_stopword(std::string_view lower_token) {
    static const std::set<std::string, std::less<>> words = {
        "a",  "an",  "and",  "are", "as",   "at",   "be",   "by",    "can",  "do",   "does",
        "for", "from", "has", "have", "how", "in",   "into", "is",    "it",   "its",  "not",
        "of", "on",   "or",  "that", "the",  "this", "to",   "was",   "were", "what", "when",
        "where", "which", "who", "will", "with"};
    return words.count(lower_token) != 0;
}

// Light suffix stemming so inflected template verbs ("treats", "treated")
// land in the same bucket. Applied uniformly, so synthetic names stay
// self-consistent even when a suffix is clipped.
inline std::string stem_token(std::string token) {
    auto ends = [&](std::string_view suf) {
        return token.size() > suf.size() + 2 &&
               token.compare(token.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends("es") || ends("ed")) token.erase(token.size() - 2);
    else if (ends("s")) token.pop_back();
    if (ends("e")) token.pop_back();
    return token;
}

class HashedEmbedder : public Embedder {
public:
    explicit HashedEmbedder(std::size_t dim = 256, std::uint64_t seed = 0x9e3779b9ull,
                            bool filter_stopwords = true)
        : dim_(dim), seed_(seed), filter_stopwords_(filter_stopwords) {}

    Embedding embed(std::string_view text) override {
        Embedding v(dim_, 0.0);
        for (const std::string& tok : tokenize(text)) {
            std::string low = to_lower(tok);
            if (filter_stopwords_ && is_stopword(low)) continue;
            v[stable_hash(stem_token(std::move(low)), seed_) % dim_] += 1.0;
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        return v;
    }

    std::size_t dim() const { return dim_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
    bool filter_stopwords_;
};

}  // namespace graglab
