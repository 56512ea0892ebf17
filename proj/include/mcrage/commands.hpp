#pragma once

#include <string>

#include "mcrage/config.hpp"

namespace mcrage {

// Library-level command bodies; the CLI binary is a thin wrapper. Each
// writes its outputs atomically under cfg.out_dir and throws on failure
// (ConfigError for invalid configs, Error for stage failures).

// Standardize -> mcrage -> write augmented CSV (original units, originals
// bit-identical), checkpoint + sidecar meta, plan manifest, training curves.
void cmd_rebalance(const RunConfig& cfg);

// The four-arm protocol: balanced control, induced imbalance, SMOTE
// treatment, MCRAGE treatment; one forest per arm, all evaluated on the
// common held-out test set. Emits the comparison table, per-group metrics,
// per-feature distribution distances and 2-D projection series.
void cmd_experiment(const RunConfig& cfg);

// Sample `count` rows of `class_id` from a saved checkpoint (+ sidecar) and
// write them destandardized with decoded attribute/label columns.
void cmd_sample(const std::string& checkpoint_path, int class_id, long count,
                std::uint64_t seed, const std::string& out_csv,
                double guidance_weight = 0.0);

// Train a forest on one CSV, evaluate on another, write the report.
void cmd_eval(const RunConfig& cfg, const std::string& train_csv, const std::string& test_csv);

// Atomic text write (temp + rename), shared by all emitters.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mcrage
