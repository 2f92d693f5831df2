#pragma once

// Flat `key = value` configuration. Lines starting with '#' are comments.
//
//   population_size, generations, crossover_prob, mutation_prob, max_depth,
//   init_depth_min, init_depth_max, elitism, enumeration_cap, mc_draws,
//   seed, threads, normalization = squared_modulus | modulus,
//   functions = + - * / [sin cos log exp],
//   terminal.<name> = const:<real> | index_k | stat:<d_avg|av|h|l>

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "msci/evolve.hpp"
#include "msci/qmat.hpp"
#include "msci/text.hpp"
#include "msci/xft.hpp"

namespace msci {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    GPConfig gp;
    TerminalBindings bindings;
    std::vector<ExprOp> functions{ExprOp::add, ExprOp::sub, ExprOp::mul, ExprOp::div};
    Normalization normalization = Normalization::squared_modulus;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline std::string functions_text(const std::vector<ExprOp>& fs) {
    std::string s;
    for (auto op : fs) {
        if (!s.empty()) s += ' ';
        s += symbol(op);
    }
    return s;
}

/// Key/value pairs in file order; duplicate keys are an error.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline KeyValues parse_key_values(std::istream& in, const std::string& source) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key(trim(text.substr(0, eq)));
        std::string value(trim(text.substr(eq + 1)));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        for (const auto& [k, v] : kv)
            if (k == key) throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

inline void write_key_values(const KeyValues& kv, std::ostream& out) {
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

/// Applies keys on top of `base`. Unknown keys are rejected.
inline RunConfig apply_config(RunConfig base, const KeyValues& kv, const std::string& source = "<config>") {
    auto fail = [&](const std::string& key, const std::string& why) -> ConfigError {
        return ConfigError(source + ": key '" + key + "': " + why);
    };
    auto count = [&](const std::string& key, const std::string& v) {
        auto n = parse_u64(v);
        if (!n) throw fail(key, "expected a non-negative integer");
        return static_cast<std::size_t>(*n);
    };
    auto real = [&](const std::string& key, const std::string& v) {
        auto x = parse_real(v);
        if (!x) throw fail(key, "expected a real number");
        return *x;
    };
    auto& gp = base.gp;
    TerminalBindings fresh_bindings;
    bool saw_terminal = false;
    for (const auto& [key, value] : kv) {
        if (key == "population_size") gp.population_size = count(key, value);
        else if (key == "generations") gp.generations = count(key, value);
        else if (key == "crossover_prob") gp.crossover_prob = real(key, value);
        else if (key == "mutation_prob") gp.mutation_prob = real(key, value);
        else if (key == "max_depth") gp.max_depth = static_cast<int>(count(key, value));
        else if (key == "init_depth_min") gp.init_depth_min = static_cast<int>(count(key, value));
        else if (key == "init_depth_max") gp.init_depth_max = static_cast<int>(count(key, value));
        else if (key == "elitism") gp.elitism = count(key, value);
        else if (key == "enumeration_cap") gp.enumeration_cap = count(key, value);
        else if (key == "mc_draws") gp.mc_draws = count(key, value);
        else if (key == "seed") gp.seed = count(key, value);
        else if (key == "threads") gp.threads = count(key, value);
        else if (key == "normalization") {
            try {
                base.normalization = parse_normalization(value);
            } catch (const std::invalid_argument& e) {
                throw fail(key, e.what());
            }
        } else if (key == "functions") {
            std::vector<ExprOp> fs;
            std::istringstream words(value);
            std::string w;
            while (words >> w) {
                auto op = expr_op_from_symbol(w);
                if (!op) throw fail(key, "unknown operator '" + w + "'");
                fs.push_back(*op);
            }
            if (fs.empty()) throw fail(key, "operator list is empty");
            base.functions = std::move(fs);
        } else if (key.starts_with("terminal.")) {
            try {
                fresh_bindings.bind(key.substr(9), parse_source(value));
            } catch (const std::invalid_argument& e) {
                throw fail(key, e.what());
            }
            saw_terminal = true;
        } else {
            throw fail(key, "unknown key");
        }
    }
    if (saw_terminal) base.bindings = std::move(fresh_bindings);
    try {
        gp.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return apply_config(std::move(base), parse_key_values(in, path), path);
}

/// Every effective setting. Applying the dump to a base without bindings
/// reproduces the config exactly.
inline KeyValues dump_config(const RunConfig& c) {
    const auto& gp = c.gp;
    KeyValues kv{
        {"population_size", std::to_string(gp.population_size)},
        {"generations", std::to_string(gp.generations)},
        {"crossover_prob", format_real(gp.crossover_prob)},
        {"mutation_prob", format_real(gp.mutation_prob)},
        {"max_depth", std::to_string(gp.max_depth)},
        {"init_depth_min", std::to_string(gp.init_depth_min)},
        {"init_depth_max", std::to_string(gp.init_depth_max)},
        {"elitism", std::to_string(gp.elitism)},
        {"enumeration_cap", std::to_string(gp.enumeration_cap)},
        {"mc_draws", std::to_string(gp.mc_draws)},
        {"seed", std::to_string(gp.seed)},
        {"threads", std::to_string(gp.threads)},
        {"normalization", std::string(normalization_name(c.normalization))},
        {"functions", functions_text(c.functions)},
    };
    for (const auto& [name, src] : c.bindings.items()) kv.emplace_back("terminal." + name, source_text(src));
    return kv;
}

}  // namespace msci
