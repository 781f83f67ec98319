#pragma once
// Line-delimited structured text records, the on-disk format for manifests,
// query files, graph files, poison plans and reports.
//
// One record per line:  kind<TAB>key=value<TAB>key=value...
// Tabs, newlines, backslashes and '=' in keys are escaped with backslashes.

#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace graglab {

struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t line_no, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

struct Record {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> fields;

    void set(std::string key, std::string value) {
        fields.emplace_back(std::move(key), std::move(value));
    }
    void set(std::string key, long long v) { set(std::move(key), std::to_string(v)); }

    const std::string* find(std::string_view key) const {
        for (const auto& [k, v] : fields)
            if (k == key) return &v;
        return nullptr;
    }
    const std::string& get(std::string_view key) const {
        const std::string* v = find(key);
        if (!v) throw std::runtime_error("record '" + kind + "' missing field '" + std::string(key) + "'");
        return *v;
    }
    long long get_int(std::string_view key) const { return std::stoll(get(key)); }
    double get_real(std::string_view key) const { return std::stod(get(key)); }
};

namespace detail {

inline std::string escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '=': out += "\\="; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape(std::string_view s, std::size_t line_no) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out.push_back(s[i]);
            continue;
        }
        if (++i == s.size()) throw ParseError(line_no, "dangling escape");
        switch (s[i]) {
            case '\\': out.push_back('\\'); break;
            case 't': out.push_back('\t'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            case '=': out.push_back('='); break;
            default: throw ParseError(line_no, "bad escape");
        }
    }
    return out;
}

}  // namespace detail

inline std::string format_record(const Record& rec) {
    std::string line = detail::escape(rec.kind);
    for (const auto& [k, v] : rec.fields) {
        line += '\t';
        line += detail::escape(k);
        line += '=';
        line += detail::escape(v);
    }
    return line;
}

inline Record parse_record(std::string_view line, std::size_t line_no) {
    Record rec;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= line.size()) {
        std::size_t tab = line.find('\t', pos);
        std::string_view cell = line.substr(pos, tab == std::string_view::npos ? tab : tab - pos);
        if (first) {
            rec.kind = detail::unescape(cell, line_no);
            if (rec.kind.empty()) throw ParseError(line_no, "empty record kind");
            first = false;
        } else {
            // split on the first unescaped '='
            std::size_t eq = std::string_view::npos;
            for (std::size_t i = 0; i < cell.size(); ++i) {
                if (cell[i] == '\\') { ++i; continue; }
                if (cell[i] == '=') { eq = i; break; }
            }
            if (eq == std::string_view::npos) throw ParseError(line_no, "field without '='");
            rec.set(detail::unescape(cell.substr(0, eq), line_no),
                    detail::unescape(cell.substr(eq + 1), line_no));
        }
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
    }
    return rec;
}

inline void write_records(const std::string& path, const std::vector<Record>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& rec : records) out << format_record(rec) << '\n';
}

inline std::vector<Record> read_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<Record> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out.push_back(parse_record(line, line_no));
    }
    return out;
}

}  // namespace graglab
