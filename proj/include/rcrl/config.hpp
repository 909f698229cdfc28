#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace rcrl {

struct MissingField : std::runtime_error {
    std::string field;
    explicit MissingField(const std::string& name)
        : std::runtime_error("missing required config field: " + name), field(name) {}
};

// Flat TOML-style key-value run configuration: one `key = value` per line,
// `#` comments, quoted or bare strings. CLI flags overwrite via set().
class KeyValueConfig {
public:
    static KeyValueConfig from_string(const std::string& text);
    static KeyValueConfig from_file(const std::string& path);  // throws on unreadable file

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    double require_double(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    long require_long(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& items() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace rcrl
