#include "osr/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "osr/error.hpp"

namespace osr {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

int ConfigMap::get_int(const std::string& key, int fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        size_t pos = 0;
        const int v = std::stoi(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected integer, got '" + it->second + "'");
    }
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected number, got '" + it->second + "'");
    }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("key '" + key + "': expected boolean, got '" + it->second + "'");
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

uint64_t ConfigMap::get_u64(const std::string& key, uint64_t fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected unsigned integer, got '" + it->second + "'");
    }
}

std::string ConfigMap::canonical() const {
    std::string out;
    for (const auto& [k, v] : values) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

ConfigMap parse_config_text(const std::string& text, const std::set<std::string>& known_keys,
                            const std::string& source_name) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": empty key or value");
        if (!known_keys.count(key))
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (cfg.values.count(key))
            throw ConfigError(source_name + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.values[key] = value;
    }
    return cfg;
}

ConfigMap parse_config_file(const std::string& path, const std::set<std::string>& known_keys) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), known_keys, path);
}

const std::set<std::string>& train_config_keys() {
    static const std::set<std::string> keys = {
        "epochs",      "epochs_gan", "batch",      "loss",     "lambda_adv", "nn",        "seed",
        "sample_policy", "sample_m", "patch_rows", "patch_cols", "patch",    "stride",    "n_left",
        "mode",        "lr",         "beta1",      "beta2",    "adam_eps",   "disc_hidden", "residual",
        "stop_risk",   "threads",    "sigma",      "kernel_size", "noise_sigma", "decim",
    };
    return keys;
}

uint64_t fnv1a64(const std::string& text) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace osr
