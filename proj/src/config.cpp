#include "epm/config.hpp"

#include <fstream>
#include <sstream>

#include "epm/errors.hpp"

namespace epm {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw DataFormatError("unterminated section header", lineno);
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw DataFormatError("expected key = value", lineno);
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw DataFormatError("empty key", lineno);
        cfg.values_[section][key] = val;
    }
    return cfg;
}

std::optional<std::string> Config::lookup(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

bool Config::has(const std::string& section, const std::string& key) const {
    return lookup(section, key).has_value();
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    auto v = lookup(section, key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        double d = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(*v);
        return d;
    } catch (const std::exception&) {
        throw ValidationError("config value [" + section + "]." + key + " is not a number: " + *v);
    }
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
    auto v = lookup(section, key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        int i = std::stoi(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(*v);
        return i;
    } catch (const std::exception&) {
        throw ValidationError("config value [" + section + "]." + key + " is not an integer: " + *v);
    }
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    auto v = lookup(section, key);
    return v ? *v : fallback;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section][key] = value;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [sec, kv] : values_) {
        out += "[" + sec + "]\n";
        for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    }
    return out;
}

} // namespace epm
