#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cfcal {

/// Structured-text config: `[section]` headers followed by `key = value` lines.
/// `#` and `;` start comments. The same format serves scenario files,
/// calibration specs, corridor configs, and parameter fixtures.
class Config {
public:
    static Config load(const std::string& path);
    static Config parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    std::string get_or_throw(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int_or(const std::string& section, const std::string& key, long fallback) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    std::vector<std::string> sections() const;
    const std::map<std::string, std::string>& section(const std::string& name) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace cfcal
