#pragma once
// Text primitives shared by every module: tokenization, canonical entity
// names, sentence splitting, a stable 64-bit hash, and Y/M/D dates.
//
// The tokenizer defines "token" for every budget in the project (chunk
// sizes, context packing, the 30-token poison limit): a token is a maximal
// run of alphanumeric characters. Punctuation never counts.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graglab {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (is_word_char(c)) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        bool w = is_word_char(c);
        if (w && !in_word) ++n;
        in_word = w;
    }
    return n;
}

// Sentence boundaries are '.', '!' and '?'. Semicolons stay inside the
// sentence; the extractor splits narrative clauses itself.
inline std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        cur.push_back(c);
        if (c == '.' || c == '!' || c == '?') {
            // trim leading whitespace
            std::size_t b = cur.find_first_not_of(" \t\r\n");
            if (b != std::string::npos) out.push_back(cur.substr(b));
            cur.clear();
        }
    }
    std::size_t b = cur.find_first_not_of(" \t\r\n");
    if (b != std::string::npos) out.push_back(cur.substr(b));
    return out;
}

inline std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::toupper(c));
    });
    return out;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Canonical entity name: trimmed, inner whitespace collapsed, upper-cased.
inline std::string canonical_name(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : trim(raw)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

// Case-folded substring test, used for answer comparison.
inline bool contains_fold(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

// FNV-1a, fixed offset basis; stable across platforms and runs.
inline std::uint64_t stable_hash(std::string_view s, std::uint64_t seed = 0) {
    std::uint64_t h = 14695981039346656037ull ^ seed;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    // Total order for the temporal-precedence rule.
    auto key() const { return year * 10000 + month * 100 + day; }
    friend bool operator==(const Date& a, const Date& b) { return a.key() == b.key(); }
    friend bool operator<(const Date& a, const Date& b) { return a.key() < b.key(); }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d/%02d/%02d", year, month, day);
        return buf;
    }

    // Accepts YYYY/MM/DD and YYYY-MM-DD.
    static std::optional<Date> parse(std::string_view s) {
        Date d;
        int n = std::sscanf(std::string(s).c_str(), "%d/%d/%d", &d.year, &d.month, &d.day);
        if (n != 3) n = std::sscanf(std::string(s).c_str(), "%d-%d-%d", &d.year, &d.month, &d.day);
        if (n != 3 || d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
        return d;
    }
};

// Capitalize the first letter of a sentence fragment.
inline std::string capitalize(std::string s) {
    for (char& c : s) {
        if (is_word_char(c)) {
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            break;
        }
        if (c != ' ') break;
    }
    return s;
}

// Truncate to at most max_tokens tokens, cutting at a token boundary.
inline std::string truncate_tokens(std::string_view text, std::size_t max_tokens) {
    if (max_tokens == 0) return {};
    std::size_t n = 0;
    bool in_word = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        bool w = is_word_char(text[i]);
        if (w && !in_word) {
            if (n == max_tokens) return trim(text.substr(0, i));
            ++n;
        }
        in_word = w;
    }
    return std::string(text);
}

}  // namespace graglab
