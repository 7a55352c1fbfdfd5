#ifndef OSR_CONFIG_HPP
#define OSR_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace osr {

// Flat `key = value` config file: one pair per line, '#' comments, blank
// lines ignored. Keys must come from the registered set; unknown keys and
// malformed lines are errors that carry the line number.
struct ConfigMap {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;

    // Canonical "key=value" lines, sorted; input to the config hash.
    std::string canonical() const;
};

ConfigMap parse_config_text(const std::string& text, const std::set<std::string>& known_keys,
                            const std::string& source_name = "<config>");
ConfigMap parse_config_file(const std::string& path, const std::set<std::string>& known_keys);

// The training/config keys understood by the CLI.
const std::set<std::string>& train_config_keys();

// FNV-1a 64-bit, used as the config hash stamped into every CSV row.
uint64_t fnv1a64(const std::string& text);
std::string hash_hex(uint64_t h);

} // namespace osr

#endif
