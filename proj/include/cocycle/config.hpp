#pragma once

// Experiment configuration: flat key=value text with [section] headers.
// Keys are unique across sections; a key may appear before any header or
// under its own section only.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace cocycle::cli {

// Bad configuration or flag; names the offending key.
class UsageError : public std::runtime_error {
public:
    UsageError(std::string key, const std::string& message)
        : std::runtime_error("key '" + key + "': " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct KeySpec {
    std::string section;
    std::string key;
    std::string default_value;
    std::string help;
};

inline const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = {
        {"general", "seed", "20240601", "master seed (WORKBENCH_SEED overrides the file value)"},
        {"general", "output", "", "CSV output path; stdout when empty"},
        {"general", "json", "", "JSON summary path; none when empty"},
        {"general", "bits", "false", "divide information values by log 2 at output"},
        {"general", "rank", "2", "rank r of the free group"},
        {"alphabet", "probabilities", "0.5,0.5", "comma-separated symbol probabilities"},
        {"partition", "kind", "symbol", "symbol | block"},
        {"partition", "window", "e", "comma-separated window words for block codes"},
        {"partition", "code", "sum", "sum | comma-separated code table"},
        {"run", "n_min", "0", "first level"},
        {"run", "n_max", "6", "last level"},
        {"run", "depth", "0", "boundary depth; 0 picks n_max + window radius + 1"},
        {"run", "mode", "exact", "exact | monte-carlo"},
        {"run", "samples", "100000", "Monte Carlo sample count M"},
        {"run", "exact_cap", "24", "largest coordinate component enumerated exactly"},
        {"run", "miller_madow", "true", "apply the Miller-Madow correction to plug-in entropies"},
        {"run", "runs", "1", "independent (x, xi) trajectories"},
        {"run", "xi_samples", "8", "boundary points per level in sweeps"},
        {"ergodic", "observable", "symbol", "symbol | constant | boundary-letter"},
        {"ergodic", "symbol", "0", "symbol of the indicator observable"},
        {"ergodic", "starts", "10", "independent start points"},
        {"model", "model", "tail", "tail | odometer"},
        {"model", "length", "5", "string length L of the finite model"},
        {"model", "order", "2", "order of the cyclic automorphism"},
        {"covering", "delta", "0.1", "covering slack delta in (0, 1)"},
        {"covering", "rows", "0", "rows M; 0 picks the smallest admissible"},
        {"covering", "columns", "3", "maximum columns per row"},
        {"covering", "density", "0.2", "probability that a point is a center"},
        {"covering", "instances", "1", "number of generated instances"},
        {"covering", "adversarial", "false", "decreasing levels (hypothesis fails)"},
        {"subadditive", "functional", "hP", "hP | cardinality | squared"},
        {"subadditive", "levels", "", "chain levels; empty means 0..L"},
        {"subadditive", "blocks", "1-2,2-3", "candidate coordinate blocks first-last"},
        {"subadditive", "trials", "200", "random decompositions for the property check"},
    };
    return specs;
}

inline const KeySpec* find_key(std::string_view key) {
    for (const auto& s : key_specs())
        if (s.key == key) return &s;
    return nullptr;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

class Config {
public:
    Config() {
        for (const auto& s : key_specs()) values_[s.key] = s.default_value;
    }

    void set(const std::string& key, const std::string& value) {
        if (!find_key(key)) throw UsageError(key, "unknown key");
        values_[key] = value;
    }

    void load_text(std::string_view text) {
        std::string section;
        std::istringstream in{std::string(text)};
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#' || line[0] == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw UsageError(line, "unterminated section header on line " + std::to_string(line_no));
                section = trim(std::string_view(line).substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw UsageError(line, "expected key=value on line " + std::to_string(line_no));
            const std::string key = trim(std::string_view(line).substr(0, eq));
            const auto* spec = find_key(key);
            if (!spec) throw UsageError(key, "unknown key on line " + std::to_string(line_no));
            if (!section.empty() && section != spec->section)
                throw UsageError(key, "belongs to section [" + spec->section + "], found under [" + section + "]");
            values_[key] = trim(std::string_view(line).substr(eq + 1));
        }
    }

    void load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw UsageError("config", "cannot open '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        load_text(ss.str());
    }

    const std::string& get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw UsageError(key, "unknown key");
        return it->second;
    }

    template <typename T>
    T get_number(const std::string& key) const {
        return parse_number<T>(key, get(key));
    }

    std::int64_t get_int(const std::string& key) const { return get_number<std::int64_t>(key); }
    std::uint64_t get_u64(const std::string& key) const { return get_number<std::uint64_t>(key); }
    double get_double(const std::string& key) const { return get_number<double>(key); }

    bool get_bool(const std::string& key) const {
        const auto& v = get(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw UsageError(key, "expected true or false, got '" + v + "'");
    }

    template <typename T>
    std::vector<T> get_list(const std::string& key) const {
        std::vector<T> out;
        for (const auto& item : split_list(get(key))) out.push_back(parse_number<T>(key, item));
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    template <typename T>
    static T parse_number(const std::string& key, const std::string& text) {
        T v{};
        const char* b = text.data();
        const char* e = b + text.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p != e || text.empty()) throw UsageError(key, "cannot parse '" + text + "' as a number");
        return v;
    }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace cocycle::cli
