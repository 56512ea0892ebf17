#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mcrage/denoiser.hpp"
#include "mcrage/diffusion.hpp"
#include "mcrage/forest.hpp"
#include "mcrage/schema.hpp"

namespace mcrage {

struct ImbalanceSpec {
    std::string column;         // attribute (or label) name
    std::string minority_value; // category value string
    double fraction = 0.1;      // (0,1]
};

struct SplitSpec {
    double test_fraction = 0.2;
    bool stratified = true;
};

struct ScheduleSpec {
    double beta_start = kDefaultBetaStart;
    std::optional<double> beta_end;
    std::optional<int> t_prime;
    bool paper_variance = false;
};

struct GridSearchSpec {
    bool enabled = false;
    std::vector<double> learning_rates; // default: 5 log-spaced in [1e-4, 1e-2]
    std::vector<double> dropout_rates;  // default: {0, 0.05, 0.1, 0.2, 0.3}
};

// One committable run artifact; CLI flags override individual fields.
struct RunConfig {
    std::string dataset_path;
    ColumnSchema schema;

    std::optional<ImbalanceSpec> imbalance;
    SplitSpec split;
    ScheduleSpec schedule;
    TrainConfig train;
    GuidanceConfig guidance;
    ForestConfig forest;
    GridSearchSpec grid_search;
    int smote_k = 5;
    int probe_trees = 25;
    bool balance_attribute = true;   // undersample the imbalance column first
    bool share_forest_seed = false;  // paired-comparison option across arms
    std::string positive_value;      // label value string; empty = code 1
    std::string out_dir = "out";
    std::uint64_t master_seed = 0;

    // Range checks; throws ConfigError.
    void validate() const;

    std::uint64_t stage_seed(std::string_view stage, std::uint64_t index = 0) const;
};

RunConfig load_config(const std::string& path);

}  // namespace mcrage
