#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wbplab {

// Plain-text key-value document with [section] headers. Order-preserving,
// so serialize(parse(text)) is canonical and stable. Used for experiment
// configs and checkpoints.
//
//   # comment
//   [section]
//   key = value            (value may be a space-separated list)
class KvDoc {
  public:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
        bool operator==(const Section& other) const = default;
    };

    static KvDoc parse(std::istream& in);
    static KvDoc parse_string(const std::string& text);
    static KvDoc parse_file(const std::string& path);

    void serialize(std::ostream& out) const;
    std::string serialize_string() const;
    void write_file(const std::string& path) const;

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section,
                                   const std::string& key) const;
    std::string require(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key,
             std::string value);

    // Typed accessors; throw ParamError on malformed values.
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const;
    std::vector<double> get_doubles(const std::string& section,
                                    const std::string& key) const;
    std::vector<std::string> get_words(const std::string& section,
                                       const std::string& key) const;

    void set_double(const std::string& section, const std::string& key, double v);
    void set_int(const std::string& section, const std::string& key,
                 std::int64_t v);
    void set_bool(const std::string& section, const std::string& key, bool v);
    void set_doubles(const std::string& section, const std::string& key,
                     const std::vector<double>& v);

    const std::vector<Section>& sections() const { return sections_; }
    bool has_section(const std::string& name) const;

    bool operator==(const KvDoc& other) const = default;

  private:
    Section& section(const std::string& name);
    const Section* find(const std::string& name) const;

    std::vector<Section> sections_;
};

// Shortest round-trip decimal formatting for doubles; all numeric output in
// CSV files and checkpoints goes through this so reruns are byte-identical.
std::string format_double(double v);

}  // namespace wbplab
