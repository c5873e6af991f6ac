#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace sqa {

// key=value config file: one pair per line, '#' comments, blank lines
// ignored. Later keys override earlier ones; CLI flags override files.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig from_file(const std::string& path);
    static KvConfig from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Required variants throw ConfigError when the key is missing.
    std::string require_string(const std::string& key) const;
    std::int64_t require_int(const std::string& key) const;
    double require_double(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    // Overlay other on top of this (other wins).
    void merge_from(const KvConfig& other);

private:
    std::map<std::string, std::string> values_;
};

}  // namespace sqa
