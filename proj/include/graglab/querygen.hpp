#pragma once
// Multi-hop query synthesis from a gold triple set. Only chains where every
// hop has exactly one forward candidate become queries, so the gold answer
// is unambiguous and clean-corpus accuracy is exact by construction.

#include <map>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "domain.hpp"

namespace graglab {

struct QueryGenConfig {
    int hops = 2;                 // 0: every registered pattern length
    std::size_t max_queries = 0;  // 0: no limit
};

inline std::vector<Query> generate_queries(const std::vector<Triple>& gold,
                                           const DomainSchema& sch,
                                           const QueryGenConfig& cfg = {}) {
    // (subject, label) -> objects
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> forward;
    for (const auto& t : gold) forward[{t.subject, t.type_id}].push_back(t.object);

    std::vector<std::string> subjects;  // unique, in gold order
    {
        std::map<std::string, bool> seen;
        for (const auto& t : gold)
            if (!seen[t.subject]) {
                seen[t.subject] = true;
                subjects.push_back(t.subject);
            }
    }

    std::vector<Query> out;
    std::size_t n = 0;
    for (const auto& pat : sch.patterns) {
        if (cfg.hops > 0 && static_cast<int>(pat.type_ids.size()) != cfg.hops) continue;
        for (const auto& anchor : subjects) {
            std::string cur = anchor;
            std::vector<Triple> path;
            bool ok = true;
            for (const auto& label : pat.type_ids) {
                auto it = forward.find({cur, label});
                if (it == forward.end() || it->second.size() != 1) {
                    ok = false;
                    break;
                }
                path.push_back({cur, label, it->second.front()});
                cur = it->second.front();
            }
            if (!ok) continue;
            Query q;
            q.id = "q-" + domain_name(sch.domain) + "-" + std::to_string(n++);
            q.text = fill_anchor(pat.texts.front(), anchor);
            q.anchor_entity = anchor;
            q.gold_path = std::move(path);
            q.gold_answer = cur;
            q.hop_count = static_cast<int>(q.gold_path.size());
            q.validate();
            out.push_back(std::move(q));
            if (cfg.max_queries && out.size() >= cfg.max_queries) return out;
        }
    }
    if (out.empty())
        throw ConfigError("insufficient graph depth: no unambiguous " +
                          (cfg.hops > 0 ? std::to_string(cfg.hops) + "-hop" : std::string("")) +
                          " chains in the gold triples");
    return out;
}

}  // namespace graglab
