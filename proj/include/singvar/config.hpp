#pragma once

// INI-style experiment configuration: `[section]` headers, `key = value`
// lines, `#`/`;` comments. Keys are flattened to `section.key`. Overrides are
// dotted `key=value` strings. CSV output uses shortest round-trip doubles.

#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace singvar {

std::string format_double(double v);

class Config {
public:
    Config() = default;

    static Config parse_text(const std::string& text);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void apply_override(const std::string& key_eq_value); // "a.b=c"

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const; // throws ConfigError
    std::string get_string(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double dflt) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int dflt) const;
    std::vector<double> get_doubles(const std::string& key) const; // comma-separated
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& dflt) const;
    std::vector<int> get_ints(const std::string& key,
                              const std::vector<int>& dflt) const;

    // Canonical text form (sorted sections/keys); parses back to itself.
    std::string serialize() const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);

    void row(const std::vector<std::string>& cells);
    void row_numeric(const std::vector<double>& cells);

private:
    std::ofstream out_;
    std::size_t ncols_;
};

} // namespace singvar
