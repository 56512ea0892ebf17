#include "mcrage/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mcrage/rng.hpp"

namespace mcrage {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_field(const json& obj, const std::string& key, const T& fallback,
            const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + key + "' in " + where);
    }
}

std::vector<std::string> get_names(const json& obj, const std::string& key,
                                   const std::string& where) {
    return get_field<std::vector<std::string>>(obj, key, {}, where);
}

}  // namespace

void RunConfig::validate() const {
    if (dataset_path.empty()) throw ConfigError("config: dataset path is required");
    if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
    try {
        schema.validate_names();
        train.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (imbalance) {
        if (imbalance->column.empty())
            throw ConfigError("config: imbalance.column must not be empty");
        if (imbalance->minority_value.empty())
            throw ConfigError("config: imbalance.minority_value must not be empty");
        if (!(imbalance->fraction > 0.0 && imbalance->fraction <= 1.0))
            throw ConfigError("config: imbalance.fraction must lie in (0,1]");
    }
    if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0))
        throw ConfigError("config: split.test_fraction must lie in (0,1)");
    if (!(schedule.beta_start > 0.0 && schedule.beta_start < 1.0))
        throw ConfigError("config: schedule.beta_start must lie in (0,1)");
    if (schedule.beta_end) {
        if (!(*schedule.beta_end > 0.0 && *schedule.beta_end < 1.0))
            throw ConfigError("config: schedule.beta_end must lie in (0,1)");
        if (*schedule.beta_end < schedule.beta_start)
            throw ConfigError("config: schedule.beta_end must be >= beta_start");
    }
    if (schedule.t_prime && *schedule.t_prime < 1)
        throw ConfigError("config: schedule.t_prime must be >= 1");
    if (guidance.weight < 0.0) throw ConfigError("config: guidance.weight must be >= 0");
    if (forest.tree_count < 1) throw ConfigError("config: forest.tree_count must be >= 1");
    if (forest.max_depth < 0) throw ConfigError("config: forest.max_depth must be >= 0");
    if (forest.features_per_split < 0)
        throw ConfigError("config: forest.features_per_split must be >= 0");
    if (forest.min_samples_leaf < 1)
        throw ConfigError("config: forest.min_samples_leaf must be >= 1");
    if (smote_k < 1) throw ConfigError("config: smote_k must be >= 1");
    if (probe_trees < 1) throw ConfigError("config: probe_trees must be >= 1");
    if (grid_search.enabled) {
        if (grid_search.learning_rates.empty() || grid_search.dropout_rates.empty())
            throw ConfigError("config: grid_search lists must not be empty when enabled");
        for (double lr : grid_search.learning_rates)
            if (!(lr > 0.0)) throw ConfigError("config: grid_search learning rates must be positive");
        for (double dr : grid_search.dropout_rates)
            if (!(dr >= 0.0 && dr < 1.0))
                throw ConfigError("config: grid_search dropout rates must lie in [0,1)");
    }
    if (!positive_value.empty() && schema.label_name.empty())
        throw ConfigError("config: positive_value given without a label column");
}

std::uint64_t RunConfig::stage_seed(std::string_view stage, std::uint64_t index) const {
    return derive_seed(master_seed, stage, index);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(root,
                        {"dataset", "schema", "imbalance", "split", "schedule", "train",
                         "guidance", "forest", "grid_search", "smote_k", "probe_trees",
                         "balance_attribute", "share_forest_seed", "positive_value", "out_dir",
                         "seed"},
                        "the top level");

    RunConfig cfg;
    cfg.dataset_path = get_field<std::string>(root, "dataset", "", "the top level");

    if (!root.contains("schema") || !root["schema"].is_object())
        throw ConfigError("config: a schema object is required");
    const json& js = root["schema"];
    reject_unknown_keys(js, {"continuous", "attributes", "label"}, "schema");
    cfg.schema.continuous_names = get_names(js, "continuous", "schema");
    cfg.schema.attribute_names = get_names(js, "attributes", "schema");
    cfg.schema.label_name = get_field<std::string>(js, "label", "", "schema");

    if (root.contains("imbalance")) {
        const json& ji = root["imbalance"];
        reject_unknown_keys(ji, {"column", "minority_value", "fraction"}, "imbalance");
        ImbalanceSpec spec;
        spec.column = get_field<std::string>(ji, "column", "", "imbalance");
        spec.minority_value = get_field<std::string>(ji, "minority_value", "", "imbalance");
        spec.fraction = get_field<double>(ji, "fraction", spec.fraction, "imbalance");
        cfg.imbalance = spec;
    }

    if (root.contains("split")) {
        const json& jp = root["split"];
        reject_unknown_keys(jp, {"test_fraction", "stratified"}, "split");
        cfg.split.test_fraction =
            get_field<double>(jp, "test_fraction", cfg.split.test_fraction, "split");
        cfg.split.stratified = get_field<bool>(jp, "stratified", cfg.split.stratified, "split");
    }

    if (root.contains("schedule")) {
        const json& js2 = root["schedule"];
        reject_unknown_keys(js2, {"beta_start", "beta_end", "t_prime", "paper_variance"},
                            "schedule");
        cfg.schedule.beta_start =
            get_field<double>(js2, "beta_start", cfg.schedule.beta_start, "schedule");
        if (js2.contains("beta_end"))
            cfg.schedule.beta_end = get_field<double>(js2, "beta_end", 0.0, "schedule");
        if (js2.contains("t_prime"))
            cfg.schedule.t_prime = get_field<int>(js2, "t_prime", 0, "schedule");
        cfg.schedule.paper_variance =
            get_field<bool>(js2, "paper_variance", cfg.schedule.paper_variance, "schedule");
    }

    if (root.contains("train")) {
        const json& jt = root["train"];
        reject_unknown_keys(jt,
                            {"learning_rate", "dropout_rate", "epochs", "batch_size", "p_uncond",
                             "checkpoint_every", "validation_fraction", "hidden", "embed_dim"},
                            "train");
        TrainConfig& t = cfg.train;
        t.learning_rate = get_field<double>(jt, "learning_rate", t.learning_rate, "train");
        t.dropout_rate = get_field<double>(jt, "dropout_rate", t.dropout_rate, "train");
        t.epochs = get_field<int>(jt, "epochs", t.epochs, "train");
        t.batch_size = get_field<int>(jt, "batch_size", t.batch_size, "train");
        t.p_uncond = get_field<double>(jt, "p_uncond", t.p_uncond, "train");
        t.checkpoint_every = get_field<int>(jt, "checkpoint_every", t.checkpoint_every, "train");
        t.validation_fraction =
            get_field<double>(jt, "validation_fraction", t.validation_fraction, "train");
        t.hidden = get_field<int>(jt, "hidden", t.hidden, "train");
        t.embed_dim = get_field<int>(jt, "embed_dim", t.embed_dim, "train");
    }

    if (root.contains("guidance")) {
        const json& jg = root["guidance"];
        reject_unknown_keys(jg, {"weight"}, "guidance");
        cfg.guidance.weight = get_field<double>(jg, "weight", cfg.guidance.weight, "guidance");
    }

    if (root.contains("forest")) {
        const json& jf = root["forest"];
        reject_unknown_keys(jf, {"tree_count", "max_depth", "features_per_split", "min_samples_leaf"},
                            "forest");
        ForestConfig& f = cfg.forest;
        f.tree_count = get_field<int>(jf, "tree_count", f.tree_count, "forest");
        f.max_depth = get_field<int>(jf, "max_depth", f.max_depth, "forest");
        f.features_per_split =
            get_field<int>(jf, "features_per_split", f.features_per_split, "forest");
        f.min_samples_leaf = get_field<int>(jf, "min_samples_leaf", f.min_samples_leaf, "forest");
    }

    if (root.contains("grid_search")) {
        const json& jg = root["grid_search"];
        reject_unknown_keys(jg, {"enabled", "learning_rates", "dropout_rates"}, "grid_search");
        cfg.grid_search.enabled =
            get_field<bool>(jg, "enabled", cfg.grid_search.enabled, "grid_search");
        cfg.grid_search.learning_rates = get_field<std::vector<double>>(
            jg, "learning_rates", cfg.grid_search.learning_rates, "grid_search");
        cfg.grid_search.dropout_rates = get_field<std::vector<double>>(
            jg, "dropout_rates", cfg.grid_search.dropout_rates, "grid_search");
    }
    if (cfg.grid_search.enabled) {
        if (cfg.grid_search.learning_rates.empty())
            for (int i = 0; i < 5; ++i)
                cfg.grid_search.learning_rates.push_back(std::pow(10.0, -4.0 + 0.5 * i));
        if (cfg.grid_search.dropout_rates.empty())
            cfg.grid_search.dropout_rates = {0.0, 0.05, 0.1, 0.2, 0.3};
    }

    cfg.smote_k = get_field<int>(root, "smote_k", cfg.smote_k, "the top level");
    cfg.probe_trees = get_field<int>(root, "probe_trees", cfg.probe_trees, "the top level");
    cfg.balance_attribute =
        get_field<bool>(root, "balance_attribute", cfg.balance_attribute, "the top level");
    cfg.share_forest_seed =
        get_field<bool>(root, "share_forest_seed", cfg.share_forest_seed, "the top level");
    cfg.positive_value =
        get_field<std::string>(root, "positive_value", cfg.positive_value, "the top level");
    cfg.out_dir = get_field<std::string>(root, "out_dir", cfg.out_dir, "the top level");
    cfg.master_seed = get_field<std::uint64_t>(root, "seed", cfg.master_seed, "the top level");

    cfg.validate();
    return cfg;
}

}  // namespace mcrage
