#include "adamlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace adamlab {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json to_json(const FilterKind& f) {
    return {{"type", to_string(f.type)}, {"beta", f.beta}, {"init", to_string(f.init_mode)}};
}

FilterKind filter_from_json(const json& j) {
    reject_unknown_keys(j, {"type", "beta", "init"}, "filter");
    FilterKind f;
    if (j.contains("type")) f.type = parse_filter_type(j.at("type").get<std::string>());
    read(j, "beta", f.beta);
    if (j.contains("init")) f.init_mode = parse_init_mode(j.at("init").get<std::string>());
    return f;
}

} // namespace

json to_json(const OptimizerConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"epsilon_placement", to_string(c.epsilon_placement)},
            {"weight_decay", c.weight_decay},
            {"bias_correction", c.bias_correction},
            {"init", to_string(c.init_mode)},
            {"gclip", optional_to_json(c.clip.gclip_threshold)},
            {"cclip", optional_to_json(c.clip.cclip_bound)}};
}

OptimizerConfig optimizer_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"kind", "beta1", "beta2", "epsilon", "epsilon_placement", "weight_decay",
                         "bias_correction", "init", "gclip", "cclip"},
                        "optimizer");
    OptimizerConfig c;
    if (j.contains("kind")) c.kind = parse_optimizer_kind(j.at("kind").get<std::string>());
    read(j, "beta1", c.beta1);
    read(j, "beta2", c.beta2);
    read(j, "epsilon", c.epsilon);
    if (j.contains("epsilon_placement"))
        c.epsilon_placement = parse_epsilon_placement(j.at("epsilon_placement").get<std::string>());
    read(j, "weight_decay", c.weight_decay);
    read(j, "bias_correction", c.bias_correction);
    if (j.contains("init")) c.init_mode = parse_init_mode(j.at("init").get<std::string>());
    if (j.contains("gclip")) c.clip.gclip_threshold = optional_from_json(j.at("gclip"));
    if (j.contains("cclip")) c.clip.cclip_bound = optional_from_json(j.at("cclip"));
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    json layouts = json::array();
    for (auto l : c.layouts) layouts.push_back(to_string(l));
    j["layouts"] = layouts;
    j["problem_seed"] = c.problem_seed;
    json opts = json::array();
    for (const auto& o : c.optimizers) opts.push_back({{"label", o.label}, {"config", to_json(o.config)}});
    j["optimizers"] = opts;
    j["beta"] = c.beta;
    j["lr_grid"] = c.lr_grid;
    j["seeds"] = c.seeds;
    j["steps"] = c.steps;
    j["batch_size"] = c.batch_size;
    j["warmup_fraction"] = c.warmup_fraction;
    j["floor_lr"] = c.floor_lr;
    j["eps_grid"] = c.eps_grid;
    json kinds = json::array();
    for (auto k : c.sweep_kinds) kinds.push_back(to_string(k));
    j["sweep_kinds"] = kinds;
    j["beta_base"] = c.beta_base;
    j["kappas"] = c.kappas;
    j["equal_betas"] = c.equal_betas;
    j["signal"] = {{"amplitude", c.signal.amplitude},
                   {"frequency", c.signal.frequency},
                   {"decay", c.signal.decay},
                   {"length", c.signal.length}};
    json filters = json::array();
    for (const auto& f : c.filters) filters.push_back(to_json(f));
    j["filters"] = filters;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"schema_version", "layouts", "problem_seed", "optimizers", "beta", "lr_grid",
                         "seeds", "steps", "batch_size", "warmup_fraction", "floor_lr", "eps_grid",
                         "sweep_kinds", "beta_base", "kappas", "equal_betas", "signal", "filters"},
                        "config");
    ExperimentConfig c;
    if (!j.contains("schema_version")) throw ConfigError("config: missing schema_version");
    read(j, "schema_version", c.schema_version);
    if (c.schema_version != kConfigSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));

    if (j.contains("layouts")) {
        c.layouts.clear();
        for (const auto& l : j.at("layouts")) c.layouts.push_back(parse_layout(l.get<std::string>()));
    }
    read(j, "problem_seed", c.problem_seed);
    if (j.contains("optimizers")) {
        for (const auto& o : j.at("optimizers")) {
            reject_unknown_keys(o, {"label", "config"}, "optimizers[]");
            c.optimizers.push_back({o.at("label").get<std::string>(), optimizer_from_json(o.at("config"))});
        }
    }
    read(j, "beta", c.beta);
    read(j, "lr_grid", c.lr_grid);
    read(j, "seeds", c.seeds);
    read(j, "steps", c.steps);
    read(j, "batch_size", c.batch_size);
    read(j, "warmup_fraction", c.warmup_fraction);
    read(j, "floor_lr", c.floor_lr);
    read(j, "eps_grid", c.eps_grid);
    if (j.contains("sweep_kinds")) {
        c.sweep_kinds.clear();
        for (const auto& k : j.at("sweep_kinds"))
            c.sweep_kinds.push_back(parse_optimizer_kind(k.get<std::string>()));
    }
    read(j, "beta_base", c.beta_base);
    read(j, "kappas", c.kappas);
    read(j, "equal_betas", c.equal_betas);
    if (j.contains("signal")) {
        const json& s = j.at("signal");
        reject_unknown_keys(s, {"amplitude", "frequency", "decay", "length"}, "signal");
        read(s, "amplitude", c.signal.amplitude);
        read(s, "frequency", c.signal.frequency);
        read(s, "decay", c.signal.decay);
        read(s, "length", c.signal.length);
    }
    if (j.contains("filters"))
        for (const auto& f : j.at("filters")) c.filters.push_back(filter_from_json(f));
    return c;
}

std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void save_config(const ExperimentConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write config file '" + path.string() + "'");
    out << serialize_config(c);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<LabelledOptimizer> default_quad_optimizers(double beta) {
    return {{"sgd", OptimizerConfig::sgd(beta)},
            {"signum", OptimizerConfig::signum(beta)},
            {"adam_equal_beta", OptimizerConfig::adam_equal_beta(beta)}};
}

ExperimentConfig ExperimentConfig::resolved() const {
    ExperimentConfig c = *this;
    if (c.optimizers.empty()) c.optimizers = default_quad_optimizers(c.beta);
    if (c.kappas.empty()) c.kappas = default_kappas();
    if (c.filters.empty())
        for (auto t : {FilterType::Sign, FilterType::AdamEqualBeta, FilterType::Signum, FilterType::EmaSign})
            c.filters.push_back({t, c.beta, InitMode::ZeroInit});
    return c;
}

void ExperimentConfig::validate() const {
    if (schema_version != kConfigSchemaVersion) throw ConfigError("unsupported schema_version");
    if (layouts.empty()) throw ConfigError("at least one layout is required");
    for (const auto& o : optimizers) o.config.validate();
    if (lr_grid.empty()) throw ConfigError("lr_grid must not be empty");
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    for (double lr : lr_grid)
        if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rates must be finite and >= 0");
    if (steps == 0) throw ConfigError("steps must be positive");
    if (batch_size < 1 || batch_size > 9) throw ConfigError("batch_size must lie in [1, 9]");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
        throw ConfigError("warmup_fraction must lie in [0, 1)");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0, 1)");
    if (signal.length == 0) throw ConfigError("signal length must be positive");
}

} // namespace adamlab
