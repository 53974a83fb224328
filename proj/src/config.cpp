#include "qnlb/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <string_view>

#include <fmt/format.h>

namespace qnlb {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_real(const std::string& key, const std::string& value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, value));
    }
    return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, value));
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
        }
        const auto key = trim(body.substr(0, eq));
        const auto value = trim(body.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(fmt::format("config line {}: empty key", line_no));
        }
        kv[std::string(key)] = std::string(value);
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    }
    return parse_key_values(in);
}

void apply_config(RunConfig& cfg, const KeyValues& kv) {
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter, std::less<>> setters{
        {"model.family", [&](auto&, auto& v) { cfg.model.family = parse_model_family(v); }},
        {"model.input_dim", [&](auto& k, auto& v) { cfg.model.input_dim = to_uint(k, v); }},
        {"model.hidden_dim", [&](auto& k, auto& v) { cfg.model.hidden_dim = to_uint(k, v); }},
        {"model.c_f", [&](auto& k, auto& v) { cfg.bounds.c_f = to_real(k, v); }},
        {"model.c_g", [&](auto& k, auto& v) { cfg.bounds.c_g = to_real(k, v); }},
        {"model.c_h", [&](auto& k, auto& v) { cfg.bounds.c_h = to_real(k, v); }},
        {"model.clamp", [&](auto& k, auto& v) { cfg.clamp_params = to_bool(k, v); }},
        {"qme.c1",
         [&](auto& k, auto& v) {
             cfg.qme.c1 = to_real(k, v);
             cfg.bandit.c1 = cfg.qme.c1;
         }},
        {"qme.mode", [&](auto&, auto& v) { cfg.qme.mode = parse_qme_mode(v); }},
        {"qme.seed", [&](auto& k, auto& v) { cfg.qme.seed = to_uint(k, v); }},
        {"noise.sigma2", [&](auto& k, auto& v) { cfg.noise.sigma2 = to_real(k, v); }},
        {"regression.t0", [&](auto& k, auto& v) { cfg.bandit.t0 = to_uint(k, v); }},
        {"regression.iters", [&](auto& k, auto& v) { cfg.regression.sgd_iters = to_uint(k, v); }},
        {"regression.lr", [&](auto& k, auto& v) { cfg.regression.learning_rate = to_real(k, v); }},
        {"regression.seed", [&](auto& k, auto& v) { cfg.regression.seed = to_uint(k, v); }},
        {"bandit.T", [&](auto& k, auto& v) { cfg.bandit.horizon = to_uint(k, v); }},
        {"bandit.lambda",
         [&](auto& k, auto& v) {
             if (v == "T") {
                 cfg.bandit.lambda.reset();
             } else {
                 cfg.bandit.lambda = to_real(k, v);
             }
         }},
        {"bandit.t0",
         [&](auto& k, auto& v) {
             if (v == "sqrt(T)") {
                 cfg.bandit.t0.reset();
             } else {
                 cfg.bandit.t0 = to_uint(k, v);
             }
         }},
        {"bandit.delta", [&](auto& k, auto& v) { cfg.bandit.delta = to_real(k, v); }},
        {"bandit.c1",
         [&](auto& k, auto& v) {
             cfg.bandit.c1 = to_real(k, v);
             cfg.qme.c1 = cfg.bandit.c1;
         }},
        {"bandit.beta.mode", [&](auto&, auto& v) { cfg.bandit.beta_mode = parse_beta_mode(v); }},
        {"bandit.beta.c", [&](auto& k, auto& v) { cfg.bandit.beta_c = to_real(k, v); }},
        {"bandit.beta.c0", [&](auto& k, auto& v) { cfg.bandit.beta_c0 = to_real(k, v); }},
        {"bandit.ascent.iters", [&](auto& k, auto& v) { cfg.bandit.ascent_iters = to_uint(k, v); }},
        {"bandit.ascent.lr_x", [&](auto& k, auto& v) { cfg.bandit.lr_x = to_real(k, v); }},
        {"bandit.ascent.lr_w", [&](auto& k, auto& v) { cfg.bandit.lr_w = to_real(k, v); }},
        {"bandit.ascent.restarts", [&](auto& k, auto& v) { cfg.bandit.restarts = to_uint(k, v); }},
        {"bandit.eps_min", [&](auto& k, auto& v) { cfg.bandit.eps_min = to_real(k, v); }},
        {"bandit.seed", [&](auto& k, auto& v) { cfg.bandit.seed = to_uint(k, v); }},
        {"bandit.skip_regression", [&](auto& k, auto& v) { cfg.bandit.skip_regression = to_bool(k, v); }},
    };
    for (const auto& [key, value] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError(fmt::format("unknown config key '{}'", key));
        }
        try {
            it->second(key, value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(fmt::format("{}: {}", key, e.what()));
        }
    }
}

KeyValues to_key_values(const ModelSpec& spec) {
    return KeyValues{{"model.family", std::string(to_string(spec.family))},
                     {"model.input_dim", std::to_string(spec.input_dim)},
                     {"model.hidden_dim", std::to_string(spec.hidden_dim)}};
}

ModelSpec model_spec_from(const KeyValues& kv) {
    ModelSpec spec;
    for (const auto& [key, value] : kv) {
        if (key == "model.family") {
            spec.family = parse_model_family(value);
        } else if (key == "model.input_dim") {
            spec.input_dim = to_uint(key, value);
        } else if (key == "model.hidden_dim") {
            spec.hidden_dim = to_uint(key, value);
        }
    }
    spec.validate();
    return spec;
}

}  // namespace qnlb
