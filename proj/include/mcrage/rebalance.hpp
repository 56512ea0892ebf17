#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mcrage/denoiser.hpp"
#include "mcrage/forest.hpp"
#include "mcrage/group_index.hpp"
#include "mcrage/schema.hpp"

namespace mcrage {

// How many rows each group is short of the majority.
struct RebalancePlan {
    std::vector<long> deficits; // count[majority] - count[k], >= 0
    int majority = 0;
    long total_synthetic = 0;

    static RebalancePlan from_stats(const GroupStats& stats);
};

struct McrageResult {
    Dataset augmented;          // originals first (bit-identical), synthetics after
    RebalancePlan plan;
    Checkpoint checkpoint;      // trained or pass-through
    std::vector<double> loss_curve;
    std::vector<ProbePoint> f1_probes;
    NoiseSchedule schedule;
    double trained_p_uncond = 0.0;
};

// Trains the downstream probe: samples each group's deficit from the current
// params, trains a reduced forest (probe_trees) on train+synthetic and
// returns F1 on the held-out validation rows.
ProbeFn make_f1_probe(const Dataset& train_part, const Dataset& validation,
                      const GroupIndexMap& map, const NoiseSchedule& sched,
                      const GuidanceConfig& guidance, int probe_trees, int positive_class,
                      std::uint64_t seed);

// The rebalancing procedure: group ids via the index map, deficits against
// the majority, a conditional diffusion model trained on (features, group id)
// or supplied as a checkpoint, per-group deficit sampling with decoded
// attribute/label columns, originals preserved bit-identically and flagged 0.
// `ds` must be standardized. Groups observed empty are generated anyway with
// a warning on stderr.
McrageResult mcrage(const Dataset& ds, const GroupIndexMap& map,
                    std::optional<NoiseSchedule> sched,
                    const std::variant<TrainConfig, Checkpoint>& model,
                    const GuidanceConfig& guidance, std::uint64_t seed, int probe_trees = 25,
                    int positive_class = 1);

struct SmoteWitness {
    long synthetic_row;  // row index in the augmented dataset
    long base_row;       // row indices into the input dataset
    long neighbor_row;
    double lambda;
};

struct SmoteResult {
    Dataset augmented;
    std::vector<SmoteWitness> witnesses;
};

// Classic interpolation oversampling on standardized features: for every
// synthetic row pick a random base in the group, one of its k nearest
// same-group neighbors, lambda uniform on [0,1], and emit
// base + lambda*(neighbor - base) with the group's decoded attributes/label.
// Target counts equal the plan's (majority count per group). Groups of one
// row needing synthesis are an error.
SmoteResult smote(const Dataset& ds, const std::vector<int>& group_ids, int k,
                  const RebalancePlan& plan, const GroupIndexMap& map, std::uint64_t seed);

// Uniformly discards rows of over-represented values until every value of
// `attribute` has the minimum count. Order preserved; deterministic.
Dataset undersample_balance(const Dataset& ds, const std::string& attribute, std::uint64_t seed);

}  // namespace mcrage
