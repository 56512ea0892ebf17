#include "mcrage/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "mcrage/metrics.hpp"
#include "mcrage/rng.hpp"

namespace mcrage {

RebalancePlan RebalancePlan::from_stats(const GroupStats& stats) {
    RebalancePlan plan;
    plan.majority = stats.majority;
    const long top = stats.counts[static_cast<std::size_t>(stats.majority)];
    plan.deficits.reserve(stats.counts.size());
    for (long c : stats.counts) {
        plan.deficits.push_back(top - c);
        plan.total_synthetic += top - c;
    }
    return plan;
}

namespace {

// Appends plan.deficits[k] sampled rows per group k, decoding attribute and
// label codes from the group id. Originals keep their bytes and order.
Dataset append_synthetic(const Dataset& ds, const RebalancePlan& plan,
                         const DenoiserParams& params, const NoiseSchedule& sched,
                         const GroupIndexMap& map, const GuidanceConfig& guidance,
                         std::uint64_t seed) {
    const long n = ds.features.rows();
    const long total = plan.total_synthetic;
    Dataset out;
    out.schema = ds.schema;
    out.features.resize(n + total, ds.features.cols());
    out.attributes.resize(n + total, ds.attributes.cols());
    out.labels.resize(n + total);
    out.features.topRows(n) = ds.features;
    out.attributes.topRows(n) = ds.attributes;
    out.labels.head(n) = ds.labels;
    out.synthetic.assign(static_cast<std::size_t>(n + total), 0);
    if (ds.has_flags())
        std::copy(ds.synthetic.begin(), ds.synthetic.end(), out.synthetic.begin());

    long row = n;
    for (int g = 0; g < map.group_count(); ++g) {
        const long need = plan.deficits[static_cast<std::size_t>(g)];
        if (need == 0) continue;
        const Eigen::MatrixXd synth =
            sample(params, sched, g, static_cast<int>(need), guidance,
                   derive_seed(seed, "sample_group", static_cast<std::uint64_t>(g)));
        const std::vector<int> tuple = map.decode(g);
        for (long i = 0; i < need; ++i, ++row) {
            out.features.row(row) = synth.row(i);
            out.labels[row] = tuple[0];
            for (int a = 0; a < ds.attributes.cols(); ++a)
                out.attributes(row, a) = tuple[static_cast<std::size_t>(a) + 1];
            out.synthetic[static_cast<std::size_t>(row)] = 1;
        }
    }
    out.validate();
    return out;
}

}  // namespace

ProbeFn make_f1_probe(const Dataset& train_part, const Dataset& validation,
                      const GroupIndexMap& map, const NoiseSchedule& sched,
                      const GuidanceConfig& guidance, int probe_trees, int positive_class,
                      std::uint64_t seed) {
    if (validation.features.rows() < 1) throw Error("make_f1_probe: empty validation split");
    const GroupStats stats = group_stats(train_part, map);
    const RebalancePlan plan = RebalancePlan::from_stats(stats);
    const Eigen::MatrixXd val_x = forest_inputs(validation);
    const Eigen::VectorXi val_y = validation.labels;

    return [train_part, map, sched, guidance, probe_trees, positive_class, seed, plan, val_x,
            val_y](const DenoiserParams& params, int epoch) -> double {
        const std::uint64_t probe_seed =
            derive_seed(seed, "probe_epoch", static_cast<std::uint64_t>(epoch));
        const Dataset aug =
            append_synthetic(train_part, plan, params, sched, map, guidance, probe_seed);
        ForestConfig fc;
        fc.tree_count = probe_trees;
        fc.seed = derive_seed(seed, "probe_forest", static_cast<std::uint64_t>(epoch));
        const Forest forest = Forest::fit(forest_inputs(aug), aug.labels, fc);
        return f1_score(val_y, forest.predict(val_x), positive_class);
    };
}

McrageResult mcrage(const Dataset& ds, const GroupIndexMap& map,
                    std::optional<NoiseSchedule> sched,
                    const std::variant<TrainConfig, Checkpoint>& model,
                    const GuidanceConfig& guidance, std::uint64_t seed, int probe_trees,
                    int positive_class) {
    ds.validate();
    if (ds.n() < 1) throw Error("mcrage: empty dataset");

    const GroupStats stats = group_stats(ds, map);
    const RebalancePlan plan = RebalancePlan::from_stats(stats);

    McrageResult result;
    result.plan = plan;
    result.trained_p_uncond = std::nan("");

    if (std::holds_alternative<TrainConfig>(model)) {
        TrainConfig cfg = std::get<TrainConfig>(model);
        cfg.validate();
        if (cfg.p_uncond == 0.0 && guidance.weight != 0.0)
            throw Error(
                "mcrage: guidance weight is nonzero but p_uncond is 0; the unconditional token "
                "would be sampled untrained");
        result.schedule =
            sched ? *sched : default_schedule(dataset_diameter(ds.features));

        std::vector<int> strat(static_cast<std::size_t>(ds.n()));
        for (long i = 0; i < ds.labels.size(); ++i) strat[static_cast<std::size_t>(i)] = ds.labels[i];
        const auto [train_part, validation] = train_test_split(
            ds, cfg.validation_fraction, derive_seed(seed, "probe_split"), strat);

        const ProbeFn probe =
            make_f1_probe(train_part, validation, map, result.schedule, guidance, probe_trees,
                          positive_class, derive_seed(seed, "probe"));
        const std::vector<int> train_gids = row_group_ids(train_part, map);
        cfg.seed = derive_seed(seed, "train");
        TrainResult tr = train(train_part.features, train_gids, map.group_count(),
                               result.schedule, cfg, probe);
        result.checkpoint = std::move(tr.best);
        result.loss_curve = std::move(tr.loss_curve);
        result.f1_probes = std::move(tr.f1_probes);
        result.trained_p_uncond = cfg.p_uncond;
    } else {
        result.checkpoint = std::get<Checkpoint>(model);
        const DenoiserParams& p = result.checkpoint.params;
        if (p.d != ds.d())
            throw Error("mcrage: checkpoint dimension " + std::to_string(p.d) +
                        " does not match the dataset's " + std::to_string(ds.d()));
        if (p.group_count != map.group_count())
            throw Error("mcrage: checkpoint group count " + std::to_string(p.group_count) +
                        " does not match the index map's " + std::to_string(map.group_count()));
        if (sched) {
            if (sched->t_prime != p.t_prime)
                throw Error("mcrage: schedule T' " + std::to_string(sched->t_prime) +
                            " does not match the checkpoint's " + std::to_string(p.t_prime));
            result.schedule = *sched;
        } else {
            result.schedule = default_schedule(dataset_diameter(ds.features), p.t_prime);
        }
    }

    for (int g = 0; g < map.group_count(); ++g) {
        if (stats.counts[static_cast<std::size_t>(g)] == 0 &&
            plan.deficits[static_cast<std::size_t>(g)] > 0) {
            std::fprintf(stderr,
                         "warning: group %d has no observed rows; generating %ld rows from the "
                         "conditional prior alone\n",
                         g, plan.deficits[static_cast<std::size_t>(g)]);
        }
    }

    result.augmented = append_synthetic(ds, plan, result.checkpoint.params, result.schedule, map,
                                        guidance, derive_seed(seed, "sampling"));

    const GroupStats post = group_stats(result.augmented, map);
    const long top = stats.counts[static_cast<std::size_t>(stats.majority)];
    for (long c : post.counts)
        if (c != top) throw Error("mcrage: internal error, augmented groups are not balanced");
    return result;
}

SmoteResult smote(const Dataset& ds, const std::vector<int>& group_ids, int k,
                  const RebalancePlan& plan, const GroupIndexMap& map, std::uint64_t seed) {
    ds.validate();
    const long n = ds.features.rows();
    if (k < 1) throw Error("smote: k must be >= 1");
    if (static_cast<long>(group_ids.size()) != n) throw Error("smote: group id count mismatch");
    if (static_cast<int>(plan.deficits.size()) != map.group_count())
        throw Error("smote: plan size does not match the group count");

    std::vector<std::vector<long>> rows_of(static_cast<std::size_t>(map.group_count()));
    for (long i = 0; i < n; ++i) rows_of[static_cast<std::size_t>(group_ids[static_cast<std::size_t>(i)])].push_back(i);

    SmoteResult result;
    Dataset& out = result.augmented;
    out.schema = ds.schema;
    out.features.resize(n + plan.total_synthetic, ds.features.cols());
    out.attributes.resize(n + plan.total_synthetic, ds.attributes.cols());
    out.labels.resize(n + plan.total_synthetic);
    out.features.topRows(n) = ds.features;
    out.attributes.topRows(n) = ds.attributes;
    out.labels.head(n) = ds.labels;
    out.synthetic.assign(static_cast<std::size_t>(n + plan.total_synthetic), 0);
    if (ds.has_flags())
        std::copy(ds.synthetic.begin(), ds.synthetic.end(), out.synthetic.begin());

    long row = n;
    for (int g = 0; g < map.group_count(); ++g) {
        const long need = plan.deficits[static_cast<std::size_t>(g)];
        if (need == 0) continue;
        const std::vector<long>& members = rows_of[static_cast<std::size_t>(g)];
        if (members.empty())
            throw Error("smote: group " + std::to_string(g) +
                        " needs synthesis but has no rows to interpolate");
        if (members.size() == 1)
            throw Error("smote: group " + std::to_string(g) +
                        " has a single row; no neighbor exists");

        const int eff_k = std::min<int>(k, static_cast<int>(members.size()) - 1);
        std::map<long, std::vector<long>> knn_cache;
        auto neighbors_of = [&](long base) -> const std::vector<long>& {
            auto it = knn_cache.find(base);
            if (it != knn_cache.end()) return it->second;
            std::vector<std::pair<double, long>> dist;
            dist.reserve(members.size() - 1);
            for (long other : members) {
                if (other == base) continue;
                dist.emplace_back((ds.features.row(other) - ds.features.row(base)).squaredNorm(),
                                  other);
            }
            std::sort(dist.begin(), dist.end());
            std::vector<long> nearest(static_cast<std::size_t>(eff_k));
            for (int i = 0; i < eff_k; ++i) nearest[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(i)].second;
            return knn_cache.emplace(base, std::move(nearest)).first->second;
        };

        Rng rng(derive_seed(seed, "smote_group", static_cast<std::uint64_t>(g)));
        const std::vector<int> tuple = map.decode(g);
        for (long i = 0; i < need; ++i, ++row) {
            const long base = members[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(members.size())))];
            const std::vector<long>& near = neighbors_of(base);
            const long pick = near[static_cast<std::size_t>(rng.uniform_int(eff_k))];
            const double lambda = rng.uniform();
            out.features.row(row) =
                ds.features.row(base) + lambda * (ds.features.row(pick) - ds.features.row(base));
            out.labels[row] = tuple[0];
            for (int a = 0; a < ds.attributes.cols(); ++a)
                out.attributes(row, a) = tuple[static_cast<std::size_t>(a) + 1];
            out.synthetic[static_cast<std::size_t>(row)] = 1;
            result.witnesses.push_back({row, base, pick, lambda});
        }
    }
    out.validate();
    return result;
}

Dataset undersample_balance(const Dataset& ds, const std::string& attribute, std::uint64_t seed) {
    ds.validate();
    const long n = ds.features.rows();

    // Value code per row for the named column (label allowed).
    std::vector<int> code(static_cast<std::size_t>(n));
    int cardinality = 0;
    if (attribute == ds.schema.label_name) {
        for (long i = 0; i < n; ++i) code[static_cast<std::size_t>(i)] = ds.labels[i];
        cardinality = ds.schema.label_cardinality();
    } else {
        int idx = -1;
        for (int a = 0; a < ds.schema.attribute_count(); ++a)
            if (ds.schema.attribute_names[static_cast<std::size_t>(a)] == attribute) idx = a;
        if (idx < 0)
            throw Error("undersample_balance: no attribute or label named '" + attribute + "'");
        for (long i = 0; i < n; ++i) code[static_cast<std::size_t>(i)] = ds.attributes(i, idx);
        cardinality = ds.schema.attribute_cardinality(idx);
    }

    std::vector<std::vector<long>> rows_of(static_cast<std::size_t>(cardinality));
    for (long i = 0; i < n; ++i) rows_of[static_cast<std::size_t>(code[static_cast<std::size_t>(i)])].push_back(i);
    long floor_count = -1;
    for (const auto& rows : rows_of)
        if (!rows.empty() && (floor_count < 0 || static_cast<long>(rows.size()) < floor_count))
            floor_count = static_cast<long>(rows.size());
    if (floor_count < 0) throw Error("undersample_balance: empty dataset");

    std::vector<char> keep(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < cardinality; ++v) {
        std::vector<long>& rows = rows_of[static_cast<std::size_t>(v)];
        if (rows.empty()) continue;
        if (static_cast<long>(rows.size()) > floor_count) {
            Rng rng(derive_seed(seed, "undersample", static_cast<std::uint64_t>(v)));
            for (long i = 0; i < floor_count; ++i) {
                const long j = i + rng.uniform_int(static_cast<int>(rows.size() - static_cast<std::size_t>(i)));
                std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
            }
            rows.resize(static_cast<std::size_t>(floor_count));
        }
        for (long r : rows) keep[static_cast<std::size_t>(r)] = 1;
    }
    return ds.filter(keep);
}

}  // namespace mcrage
