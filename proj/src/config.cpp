#include "fet/config.hpp"

#include <fstream>
#include <sstream>

#include "fet/dynamics.hpp"
#include "fet/errors.hpp"
#include "fet/protocol.hpp"

namespace fet {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <typename T, typename Parse>
T parse_number(const std::string& key, const std::string& raw, Parse parse) {
    try {
        std::size_t used = 0;
        T value = parse(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return value;
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': cannot parse '" + raw + "'");
    }
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        config.values_[key] = trim(line.substr(eq + 1));
    }
    return config;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_number<double>(key, it->second,
                                [](const std::string& s, std::size_t* used) { return std::stod(s, used); });
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_number<std::int64_t>(
        key, it->second, [](const std::string& s, std::size_t* used) { return std::stoll(s, used); });
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (!it->second.empty() && it->second[0] == '-') {
        throw UsageError("config key '" + key + "' must be non-negative");
    }
    return parse_number<std::uint64_t>(
        key, it->second, [](const std::string& s, std::size_t* used) { return std::stoull(s, used); });
}

std::vector<std::string> Config::get_list(const std::string& key,
                                          const std::vector<std::string>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    // Commas inside parentheses belong to the item, e.g. explicit(1:0,0:3).
    std::string current;
    int depth = 0;
    for (char ch : it->second) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            if (!trim(current).empty()) out.push_back(trim(current));
            current.clear();
        } else {
            current += ch;
        }
    }
    if (!trim(current).empty()) out.push_back(trim(current));
    return out;
}

std::vector<std::int64_t> Config::get_int_list(const std::string& key,
                                               const std::vector<std::int64_t>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::int64_t> out;
    for (const std::string& item : get_list(key, {})) {
        out.push_back(parse_number<std::int64_t>(
            key, item, [](const std::string& s, std::size_t* used) { return std::stoll(s, used); }));
    }
    return out;
}

SimConfig sim_config_from(const Config& config) {
    SimConfig sim;
    sim.n = static_cast<int>(config.get_int("n", sim.n));
    sim.c_sample = config.get_double("c_sample", sim.c_sample);
    try {
        sim.ell = config.has("ell") ? static_cast<int>(config.get_int("ell", sim.ell))
                                    : sample_size(sim.n, sim.c_sample);
    } catch (const DomainError& e) {
        throw UsageError(std::string("invalid simulation config: ") + e.what());
    }
    sim.delta = config.get_double("delta", sim.delta);
    sim.source_opinion = static_cast<int>(config.get_int("source_opinion", sim.source_opinion));
    sim.max_rounds = config.get_int("max_rounds", sim.max_rounds);
    sim.seed = config.get_uint("seed", sim.seed);
    sim.backend = parse_backend(config.get_string("backend", to_string(sim.backend)));
    sim.variant = parse_variant(config.get_string("variant", to_string(sim.variant)));
    sim.persistence_rounds =
        static_cast<int>(config.get_int("persistence_rounds", sim.persistence_rounds));
    try {
        sim.validate();
    } catch (const DomainError& e) {
        throw UsageError(std::string("invalid simulation config: ") + e.what());
    }
    return sim;
}

}  // namespace fet
