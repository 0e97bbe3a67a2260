#pragma once

// Flat "key = value" configuration files. '#' starts a comment; blank lines are
// ignored; later keys override earlier ones.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fet {

class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    // Comma-separated list.
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) const;
    std::vector<std::int64_t> get_int_list(const std::string& key,
                                           const std::vector<std::int64_t>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct SimConfig;
struct Preset;

// Reads n, ell (or c_sample), delta, source_opinion, max_rounds, seed, backend,
// variant, persistence_rounds. Throws UsageError on malformed values.
SimConfig sim_config_from(const Config& config);

}  // namespace fet
