#pragma once

#include <cctype>
#include <cstdlib>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sslstm/csv.hpp"
#include "sslstm/errors.hpp"
#include "sslstm/pipeline.hpp"

namespace sslstm {

/// Flat dotted-key text configuration mirroring PipelineConfig. Every key
/// has a default; unknown keys are rejected. Environment variables override
/// file values: key `sgvmd.alpha` maps to `SSLSTM_SGVMD_ALPHA`.
inline constexpr const char* kEnvPrefix = "SSLSTM_";

namespace detail {

struct ConfigBinding {
    std::string key;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
};

inline int parse_int_value(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(text, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (used != text.size())
        throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
    return value;
}

inline std::uint64_t parse_uint64_value(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = std::string::npos;
    }
    if (used != text.size())
        throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
    return value;
}

inline double parse_double_value(const std::string& key, const std::string& text) {
    double value = 0.0;
    if (!parse_double(text, value))
        throw ConfigError("key '" + key + "': '" + text + "' is not a number");
    return value;
}

inline std::vector<ConfigBinding> config_bindings() {
    std::vector<ConfigBinding> b;
    auto add_int = [&](const std::string& key, auto member) {
        b.push_back({key,
                     [member](const PipelineConfig& c) { return std::to_string(std::invoke(member, c)); },
                     [key, member](PipelineConfig& c, const std::string& v) {
                         std::invoke(member, c) = parse_int_value(key, v);
                     }});
    };
    auto add_double = [&](const std::string& key, auto member) {
        b.push_back({key,
                     [member](const PipelineConfig& c) { return format_value(std::invoke(member, c)); },
                     [key, member](PipelineConfig& c, const std::string& v) {
                         std::invoke(member, c) = parse_double_value(key, v);
                     }});
    };

    add_int("embedding.d", [](auto& c) -> auto& { return c.embedding.d; });
    add_int("embedding.tau", [](auto& c) -> auto& { return c.embedding.tau; });
    add_int("snapshot.window", [](auto& c) -> auto& { return c.snapshot_window; });

    add_int("extraction.subarray_len", [](auto& c) -> auto& { return c.extraction.subarray_len; });
    add_int("extraction.smoothing_degree",
            [](auto& c) -> auto& { return c.extraction.smoothing_degree; });
    b.push_back({"extraction.order_rule",
                 [](const PipelineConfig& c) {
                     return c.extraction.order.kind == ModelOrderRule::Kind::Fixed
                                ? std::string("fixed")
                                : std::string("energy");
                 },
                 [](PipelineConfig& c, const std::string& v) {
                     if (v == "fixed")
                         c.extraction.order.kind = ModelOrderRule::Kind::Fixed;
                     else if (v == "energy")
                         c.extraction.order.kind = ModelOrderRule::Kind::EnergyFraction;
                     else
                         throw ConfigError("key 'extraction.order_rule': expected 'energy' or "
                                           "'fixed', got '" + v + "'");
                 }});
    add_double("extraction.energy_fraction",
               [](auto& c) -> auto& { return c.extraction.order.energy_fraction; });
    add_int("extraction.fixed_order", [](auto& c) -> auto& { return c.extraction.order.fixed_order; });

    add_double("sgvmd.alpha", [](auto& c) -> auto& { return c.sgvmd.alpha; });
    add_double("sgvmd.beta", [](auto& c) -> auto& { return c.sgvmd.beta; });
    add_double("sgvmd.eta", [](auto& c) -> auto& { return c.sgvmd.eta; });
    add_double("sgvmd.epsilon", [](auto& c) -> auto& { return c.sgvmd.epsilon; });
    add_int("sgvmd.max_modes", [](auto& c) -> auto& { return c.sgvmd.max_modes; });
    add_int("sgvmd.max_inner_iters", [](auto& c) -> auto& { return c.sgvmd.max_inner_iters; });

    add_double("classify.trend_cutoff", [](auto& c) -> auto& { return c.classify.trend_cutoff; });
    add_double("classify.energy_share", [](auto& c) -> auto& { return c.classify.energy_share; });

    auto add_hyperparams = [&](const std::string& section, Hyperparams PipelineConfig::* hp) {
        add_int(section + ".hidden_size", [hp](auto& c) -> auto& { return (c.*hp).hidden_size; });
        add_double(section + ".initial_lr", [hp](auto& c) -> auto& { return (c.*hp).initial_lr; });
        add_int(section + ".max_epochs", [hp](auto& c) -> auto& { return (c.*hp).max_epochs; });
        add_int(section + ".lr_drop_period",
                [hp](auto& c) -> auto& { return (c.*hp).lr_drop_period; });
        add_double(section + ".lr_drop_factor",
                   [hp](auto& c) -> auto& { return (c.*hp).lr_drop_factor; });
        add_double(section + ".grad_clip", [hp](auto& c) -> auto& { return (c.*hp).grad_clip; });
    };
    add_hyperparams("trend", &PipelineConfig::trend_hp);
    add_hyperparams("frequency", &PipelineConfig::frequency_hp);
    add_hyperparams("residue", &PipelineConfig::residue_hp);
    add_hyperparams("baseline", &PipelineConfig::baseline_hp);

    add_int("feature.window", [](auto& c) -> auto& { return c.feature_window; });
    add_int("split.train_count", [](auto& c) -> auto& { return c.train_count; });
    add_int("split.test_count", [](auto& c) -> auto& { return c.test_count; });
    add_int("forecast.fit_span", [](auto& c) -> auto& { return c.fit_span; });
    b.push_back({"seed",
                 [](const PipelineConfig& c) { return std::to_string(c.seed); },
                 [](PipelineConfig& c, const std::string& v) {
                     c.seed = parse_uint64_value("seed", v);
                 }});
    return b;
}

inline std::string env_name(const std::string& key) {
    std::string name = kEnvPrefix;
    for (char ch : key) {
        if (ch == '.')
            name += '_';
        else
            name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    return name;
}

}  // namespace detail

using ConfigValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment; blank lines ignored.
inline ConfigValues parse_config(std::istream& is) {
    ConfigValues values;
    std::string line;
    long line_number = 0;
    while (std::getline(is, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_number) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto z = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, z - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("line " + std::to_string(line_number) + ": empty key");
        values[key] = value;
    }
    return values;
}

/// Replaces values whose corresponding SSLSTM_* environment variable is set.
inline void apply_env_overrides(ConfigValues& values) {
    for (const auto& binding : detail::config_bindings()) {
        const char* env = std::getenv(detail::env_name(binding.key).c_str());
        if (env != nullptr) values[binding.key] = env;
    }
}

/// Builds a pipeline configuration from defaults plus overrides; rejects
/// unknown keys by name.
inline PipelineConfig build_pipeline_config(const ConfigValues& values) {
    PipelineConfig cfg;
    const auto bindings = detail::config_bindings();
    for (const auto& [key, value] : values) {
        bool known = false;
        for (const auto& binding : bindings)
            if (binding.key == key) {
                binding.set(cfg, value);
                known = true;
                break;
            }
        if (!known) throw ConfigError("unknown config key '" + key + "'");
    }
    if (cfg.embedding.d < 1 || cfg.embedding.tau < 1)
        throw ConfigError("embedding dimension and delay must be >= 1");
    cfg.sgvmd.validate();
    cfg.trend_hp.validate();
    cfg.frequency_hp.validate();
    cfg.residue_hp.validate();
    cfg.baseline_hp.validate();
    return cfg;
}

/// Emits every key with its current value; the output parses back to the
/// same configuration and doubles as the default config file.
inline void write_config(std::ostream& os, const PipelineConfig& cfg) {
    for (const auto& binding : detail::config_bindings())
        os << binding.key << " = " << binding.get(cfg) << '\n';
}

}  // namespace sslstm
