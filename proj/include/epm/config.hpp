// Sectioned key=value config file ("[section]" headers, '#'/';' comments).
#pragma once

#include <map>
#include <optional>
#include <string>

namespace epm {

class Config {
  public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

    // stable canonical text (sorted sections/keys), used for run digests
    std::string canonical() const;
    bool empty() const { return values_.empty(); }

  private:
    std::optional<std::string> lookup(const std::string& section, const std::string& key) const;
    std::map<std::string, std::map<std::string, std::string>> values_;
};

} // namespace epm
