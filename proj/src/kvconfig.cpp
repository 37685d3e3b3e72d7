#include "wbplab/kvconfig.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wbplab/errors.hpp"

namespace wbplab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    // Shortest representation that parses back to the same double.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double_value(const std::string& s, const std::string& where) {
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ParamError("malformed number '" + s + "' for " + where);
    return v;
}

}  // namespace

KvDoc KvDoc::parse(std::istream& in) {
    KvDoc doc;
    std::string line;
    std::size_t lineno = 0;
    Section* current = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError("unterminated section header", lineno);
            doc.sections_.push_back({trim(t.substr(1, t.size() - 2)), {}});
            current = &doc.sections_.back();
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineno);
        if (!current) throw ParseError("entry before any [section]", lineno);
        current->entries.emplace_back(trim(t.substr(0, eq)),
                                      trim(t.substr(eq + 1)));
    }
    return doc;
}

KvDoc KvDoc::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

KvDoc KvDoc::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open config file: " + path);
    return parse(in);
}

void KvDoc::serialize(std::ostream& out) const {
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        if (i) out << "\n";
        out << "[" << sections_[i].name << "]\n";
        for (const auto& [k, v] : sections_[i].entries)
            out << k << " = " << v << "\n";
    }
}

std::string KvDoc::serialize_string() const {
    std::ostringstream out;
    serialize(out);
    return out.str();
}

void KvDoc::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParamError("cannot open output file: " + path);
    serialize(out);
}

const KvDoc::Section* KvDoc::find(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.name == name) return &s;
    return nullptr;
}

KvDoc::Section& KvDoc::section(const std::string& name) {
    for (auto& s : sections_)
        if (s.name == name) return s;
    sections_.push_back({name, {}});
    return sections_.back();
}

bool KvDoc::has_section(const std::string& name) const {
    return find(name) != nullptr;
}

bool KvDoc::has(const std::string& section, const std::string& key) const {
    return get(section, key).has_value();
}

std::optional<std::string> KvDoc::get(const std::string& section,
                                      const std::string& key) const {
    const Section* s = find(section);
    if (!s) return std::nullopt;
    for (const auto& [k, v] : s->entries)
        if (k == key) return v;
    return std::nullopt;
}

std::string KvDoc::require(const std::string& section,
                           const std::string& key) const {
    auto v = get(section, key);
    if (!v)
        throw ParamError("missing config entry [" + section + "] " + key);
    return *v;
}

void KvDoc::set(const std::string& section_name, const std::string& key,
                std::string value) {
    Section& s = section(section_name);
    for (auto& [k, v] : s.entries)
        if (k == key) {
            v = std::move(value);
            return;
        }
    s.entries.emplace_back(key, std::move(value));
}

double KvDoc::get_double(const std::string& section,
                         const std::string& key) const {
    return parse_double_value(require(section, key), "[" + section + "] " + key);
}

double KvDoc::get_double(const std::string& section, const std::string& key,
                         double fallback) const {
    auto v = get(section, key);
    return v ? parse_double_value(*v, "[" + section + "] " + key) : fallback;
}

std::int64_t KvDoc::get_int(const std::string& section,
                            const std::string& key) const {
    const std::string s = require(section, key);
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ParamError("malformed integer '" + s + "' for [" + section + "] " +
                         key);
    return v;
}

std::int64_t KvDoc::get_int(const std::string& section, const std::string& key,
                            std::int64_t fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool KvDoc::get_bool(const std::string& section, const std::string& key,
                     bool fallback) const {
    auto v = get(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ParamError("malformed boolean '" + *v + "' for [" + section + "] " +
                     key);
}

std::vector<double> KvDoc::get_doubles(const std::string& section,
                                       const std::string& key) const {
    std::istringstream in(require(section, key));
    std::vector<double> out;
    std::string word;
    while (in >> word)
        out.push_back(parse_double_value(word, "[" + section + "] " + key));
    return out;
}

std::vector<std::string> KvDoc::get_words(const std::string& section,
                                          const std::string& key) const {
    std::istringstream in(require(section, key));
    std::vector<std::string> out;
    std::string word;
    while (in >> word) out.push_back(word);
    return out;
}

void KvDoc::set_double(const std::string& section, const std::string& key,
                       double v) {
    set(section, key, format_double(v));
}

void KvDoc::set_int(const std::string& section, const std::string& key,
                    std::int64_t v) {
    set(section, key, std::to_string(v));
}

void KvDoc::set_bool(const std::string& section, const std::string& key,
                     bool v) {
    set(section, key, v ? "true" : "false");
}

void KvDoc::set_doubles(const std::string& section, const std::string& key,
                        const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += " ";
        s += format_double(v[i]);
    }
    set(section, key, s);
}

}  // namespace wbplab
