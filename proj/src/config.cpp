#include "cfcal/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cfcal {

namespace {
std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}
}  // namespace

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            cfg.data_[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        cfg.data_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    return it != data_.end() && it->second.count(key) > 0;
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    if (it == data_.end()) return std::nullopt;
    auto kt = it->second.find(key);
    if (kt == it->second.end()) return std::nullopt;
    return kt->second;
}

std::string Config::get_or_throw(const std::string& section, const std::string& key) const {
    auto v = get(section, key);
    if (!v) throw std::runtime_error("missing config key [" + section + "] " + key);
    return *v;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    return std::stod(get_or_throw(section, key));
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    auto v = get(section, key);
    return v ? std::stod(*v) : fallback;
}

long Config::get_int(const std::string& section, const std::string& key) const {
    return std::stol(get_or_throw(section, key));
}

long Config::get_int_or(const std::string& section, const std::string& key, long fallback) const {
    auto v = get(section, key);
    return v ? std::stol(*v) : fallback;
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    auto v = get(section, key);
    return v ? *v : fallback;
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : data_) out.push_back(name);
    return out;
}

const std::map<std::string, std::string>& Config::section(const std::string& name) const {
    auto it = data_.find(name);
    if (it == data_.end()) throw std::runtime_error("missing config section [" + name + "]");
    return it->second;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
}

}  // namespace cfcal
