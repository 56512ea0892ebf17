#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcrage/rebalance.hpp"
#include "mcrage/rng.hpp"
#include "test_util.hpp"

using namespace mcrage;

namespace {

// oracle with the four label x site groups thinned to the given counts
Dataset grouped_oracle(const std::vector<long>& targets, std::uint64_t seed) {
    Dataset ds = testutil::gaussian_oracle(600, seed, true);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    std::vector<long> quota = targets;
    std::vector<char> keep(static_cast<std::size_t>(ds.n()), 0);
    const std::vector<int> gids = row_group_ids(ds, map);
    for (int i = 0; i < ds.n(); ++i) {
        long& q = quota[static_cast<std::size_t>(gids[static_cast<std::size_t>(i)])];
        if (q > 0) {
            keep[static_cast<std::size_t>(i)] = 1;
            --q;
        }
    }
    for (long q : quota) REQUIRE(q == 0);
    return ds.filter(keep);
}

TrainConfig small_train(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = 64;
    cfg.hidden = 16;
    cfg.embed_dim = 4;
    cfg.checkpoint_every = 30;
    cfg.seed = seed;  // overridden inside mcrage; harmless
    return cfg;
}

}  // namespace

TEST_CASE("the plan is the pointwise deficit against the majority") {
    GroupStats st;
    st.counts = {40, 30, 20, 10};
    st.proportions = {0.4, 0.3, 0.2, 0.1};
    st.majority = 0;
    const RebalancePlan plan = RebalancePlan::from_stats(st);
    CHECK(plan.majority == 0);
    CHECK(plan.deficits == std::vector<long>{0, 10, 20, 30});
    CHECK(plan.total_synthetic == 60);

    GroupStats skew;
    skew.counts = {89, 896};
    skew.proportions = {89.0 / 985.0, 896.0 / 985.0};
    skew.majority = 1;
    const RebalancePlan p2 = RebalancePlan::from_stats(skew);
    CHECK(p2.deficits == std::vector<long>{807, 0});
    CHECK(p2.total_synthetic == 807);

    GroupStats even;
    even.counts = {5, 5};
    even.proportions = {0.5, 0.5};
    even.majority = 0;
    CHECK(RebalancePlan::from_stats(even).total_synthetic == 0);
}

TEST_CASE("mcrage equalizes group counts and keeps originals bit-identical") {
    Dataset raw = grouped_oracle({120, 60, 40, 25}, 101);
    auto [ds, sp] = standardize(raw);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);

    GuidanceConfig guidance;
    const McrageResult r = mcrage::mcrage(ds, map, std::nullopt, small_train(1), guidance, 424, 9);

    CHECK(r.plan.total_synthetic == (120 - 60) + (120 - 40) + (120 - 25));
    CHECK(r.augmented.n() == ds.n() + static_cast<int>(r.plan.total_synthetic));

    const GroupStats post = group_stats(r.augmented, map);
    for (long c : post.counts) CHECK(c == 120);

    // originals first, bit-identical, flagged 0; synthetics flagged 1
    CHECK(r.augmented.features.topRows(ds.n()) == ds.features);
    CHECK(r.augmented.attributes.topRows(ds.n()) == ds.attributes);
    CHECK(r.augmented.labels.head(ds.n()) == ds.labels);
    REQUIRE(r.augmented.has_flags());
    for (int i = 0; i < r.augmented.n(); ++i)
        CHECK(static_cast<int>(r.augmented.synthetic[static_cast<std::size_t>(i)]) ==
              (i >= ds.n() ? 1 : 0));

    // removing the flagged rows reproduces the input exactly
    std::vector<char> originals(static_cast<std::size_t>(r.augmented.n()));
    for (int i = 0; i < r.augmented.n(); ++i)
        originals[static_cast<std::size_t>(i)] = r.augmented.synthetic[static_cast<std::size_t>(i)] == 0;
    const Dataset stripped = r.augmented.filter(originals);
    CHECK(stripped.features == ds.features);
    CHECK(stripped.labels == ds.labels);

    // training bookkeeping came along
    CHECK(r.loss_curve.size() == 60);
    CHECK(r.f1_probes.size() == 2);
    CHECK(r.checkpoint.params.d == 2);
    CHECK(r.checkpoint.params.group_count == 4);
    CHECK(r.trained_p_uncond == doctest::Approx(0.1));
    CHECK(r.schedule.t_prime == r.checkpoint.params.t_prime);

    // same seed, same everything
    const McrageResult again = mcrage::mcrage(ds, map, std::nullopt, small_train(1), guidance, 424, 9);
    CHECK(again.augmented.features == r.augmented.features);
}

TEST_CASE("balanced input is a fixed point") {
    Dataset raw = grouped_oracle({50, 50, 50, 50}, 103);
    auto [ds, sp] = standardize(raw);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    const NoiseSchedule sched = default_schedule(dataset_diameter(ds.features));

    Checkpoint ck;
    ck.params = init_params(2, 4, 4, 8, 5, sched.t_prime);
    GuidanceConfig guidance;
    const McrageResult r = mcrage::mcrage(ds, map, sched, ck, guidance, 77);
    CHECK(r.plan.total_synthetic == 0);
    CHECK(r.augmented.n() == ds.n());
    CHECK(r.augmented.features == ds.features);
    for (std::uint8_t f : r.augmented.synthetic) CHECK(f == 0);

    const SmoteResult s = smote(ds, row_group_ids(ds, map), 5, r.plan, map, 99);
    CHECK(s.augmented.n() == ds.n());
    CHECK(s.witnesses.empty());
    CHECK(s.augmented.features == ds.features);
}

TEST_CASE("a trained checkpoint can be replayed through mcrage") {
    Dataset raw = grouped_oracle({80, 50, 30, 20}, 107);
    auto [ds, sp] = standardize(raw);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    GuidanceConfig guidance;

    const McrageResult trained = mcrage::mcrage(ds, map, std::nullopt, small_train(2), guidance, 31, 9);
    const McrageResult replay =
        mcrage::mcrage(ds, map, trained.schedule, trained.checkpoint, guidance, 31);

    // same checkpoint, schedule and seed: identical synthesis
    CHECK(replay.augmented.features == trained.augmented.features);
    CHECK(replay.augmented.labels == trained.augmented.labels);
    CHECK(replay.loss_curve.empty());
    CHECK(std::isnan(replay.trained_p_uncond));

    // a different sampling seed moves the synthetic block only
    const McrageResult other =
        mcrage::mcrage(ds, map, trained.schedule, trained.checkpoint, guidance, 32);
    CHECK(other.augmented.features.topRows(ds.n()) == ds.features);
    CHECK(other.augmented.features != trained.augmented.features);

    // shape guards
    Checkpoint wrong_d = trained.checkpoint;
    wrong_d.params = init_params(3, 4, 4, 8, 1, trained.schedule.t_prime);
    CHECK_THROWS_WITH_AS(mcrage::mcrage(ds, map, trained.schedule, wrong_d, guidance, 1),
                         doctest::Contains("dimension"), Error);

    Checkpoint wrong_g = trained.checkpoint;
    wrong_g.params = init_params(2, 5, 4, 8, 1, trained.schedule.t_prime);
    CHECK_THROWS_WITH_AS(mcrage::mcrage(ds, map, trained.schedule, wrong_g, guidance, 1),
                         doctest::Contains("group count"), Error);

    NoiseSchedule short_sched = default_schedule(dataset_diameter(ds.features), 20);
    REQUIRE(short_sched.t_prime != trained.schedule.t_prime);
    CHECK_THROWS_WITH_AS(mcrage::mcrage(ds, map, short_sched, trained.checkpoint, guidance, 1),
                         doctest::Contains("T'"), Error);
}

TEST_CASE("guidance without unconditional training is refused") {
    Dataset raw = grouped_oracle({40, 30, 20, 10}, 109);
    auto [ds, sp] = standardize(raw);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);

    TrainConfig cfg = small_train(3);
    cfg.p_uncond = 0.0;
    GuidanceConfig guidance;
    guidance.weight = 1.5;
    guidance.unconditional_token = map.group_count();
    CHECK_THROWS_WITH_AS(mcrage::mcrage(ds, map, std::nullopt, cfg, guidance, 8),
                         doctest::Contains("p_uncond"), Error);
}

TEST_CASE("groups with no observed rows are synthesized from the prior") {
    // site b never occurs with label pos: group (1,1) = id 3 is empty
    Dataset raw = grouped_oracle({60, 40, 30, 0}, 113);
    auto [ds, sp] = standardize(raw);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    const NoiseSchedule sched = default_schedule(dataset_diameter(ds.features));

    Checkpoint ck;
    ck.params = init_params(2, 4, 4, 8, 9, sched.t_prime);
    GuidanceConfig guidance;
    const McrageResult r = mcrage::mcrage(ds, map, sched, ck, guidance, 5);
    const GroupStats post = group_stats(r.augmented, map);
    CHECK(post.counts == std::vector<long>{60, 60, 60, 60});
}

TEST_CASE("smote synthetics live on recorded base-neighbor segments") {
    Dataset raw = grouped_oracle({90, 25, 60, 40}, 127);
    auto [ds, sp] = standardize(raw);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    const std::vector<int> gids = row_group_ids(ds, map);
    const RebalancePlan plan = RebalancePlan::from_stats(group_stats(ds, map));

    const SmoteResult r = smote(ds, gids, 5, plan, map, 515);
    CHECK(r.augmented.n() == ds.n() + static_cast<int>(plan.total_synthetic));
    CHECK(static_cast<long>(r.witnesses.size()) == plan.total_synthetic);
    CHECK(r.augmented.features.topRows(ds.n()) == ds.features);

    const GroupStats post = group_stats(r.augmented, map);
    for (long c : post.counts) CHECK(c == 90);

    for (const SmoteWitness& w : r.witnesses) {
        REQUIRE(w.synthetic_row >= ds.n());
        REQUIRE(w.base_row < ds.n());
        REQUIRE(w.neighbor_row < ds.n());
        CHECK(w.lambda >= 0.0);
        CHECK(w.lambda < 1.0);
        CHECK(w.base_row != w.neighbor_row);

        // base and neighbor share the synthetic row's group
        const int sg = r.augmented.labels[w.synthetic_row] +
                       2 * r.augmented.attributes(w.synthetic_row, 0);
        CHECK(gids[static_cast<std::size_t>(w.base_row)] == sg);
        CHECK(gids[static_cast<std::size_t>(w.neighbor_row)] == sg);

        const Eigen::RowVectorXd expect =
            ds.features.row(w.base_row) +
            w.lambda * (ds.features.row(w.neighbor_row) - ds.features.row(w.base_row));
        const double residual =
            (r.augmented.features.row(w.synthetic_row) - expect).cwiseAbs().maxCoeff();
        CHECK(residual < 1e-9);

        CHECK(r.augmented.synthetic[static_cast<std::size_t>(w.synthetic_row)] == 1);
    }

    // deterministic
    const SmoteResult again = smote(ds, gids, 5, plan, map, 515);
    CHECK(again.augmented.features == r.augmented.features);
}

TEST_CASE("smote with k=1 on a two-point group stays on the single segment") {
    // label-only schema; class 1 has exactly two members
    Dataset ds = testutil::gaussian_oracle(6, 131, false);
    std::vector<char> keep(static_cast<std::size_t>(ds.n()), 1);
    int pos_kept = 0;
    for (int i = 0; i < ds.n(); ++i) {
        if (ds.labels[i] == 1 && ++pos_kept > 2) keep[static_cast<std::size_t>(i)] = 0;
    }
    ds = ds.filter(keep);
    REQUIRE(ds.n() == 8);

    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    const std::vector<int> gids = row_group_ids(ds, map);
    const RebalancePlan plan = RebalancePlan::from_stats(group_stats(ds, map));
    REQUIRE(plan.deficits == std::vector<long>{0, 4});

    const SmoteResult r = smote(ds, gids, 1, plan, map, 17);
    Eigen::RowVectorXd p, q;
    int found = 0;
    for (int i = 0; i < ds.n(); ++i)
        if (ds.labels[i] == 1) (found++ == 0 ? p : q) = ds.features.row(i);
    REQUIRE(found == 2);

    for (const SmoteWitness& w : r.witnesses) {
        const Eigen::RowVectorXd s = r.augmented.features.row(w.synthetic_row);
        // s = p + t (q - p) for some t in [0,1]
        const Eigen::RowVectorXd d = q - p;
        const double t = (s - p).dot(d) / d.squaredNorm();
        CHECK(t >= -1e-12);
        CHECK(t <= 1.0 + 1e-12);
        CHECK((s - (p + t * d)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("smote never leaves the minority convex hull in the plane") {
    Dataset raw = grouped_oracle({50, 12, 30, 25}, 137);
    auto [ds, sp] = standardize(raw);
    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    const std::vector<int> gids = row_group_ids(ds, map);
    const RebalancePlan plan = RebalancePlan::from_stats(group_stats(ds, map));

    const SmoteResult r = smote(ds, gids, 5, plan, map, 139);

    std::vector<std::vector<Eigen::Vector2d>> hulls(4);
    for (int g = 0; g < 4; ++g) {
        std::vector<Eigen::Vector2d> pts;
        for (int i = 0; i < ds.n(); ++i)
            if (gids[static_cast<std::size_t>(i)] == g)
                pts.emplace_back(ds.features(i, 0), ds.features(i, 1));
        if (!pts.empty()) hulls[static_cast<std::size_t>(g)] = testutil::convex_hull(pts);
    }

    const std::vector<int> aug_gids = row_group_ids(r.augmented, map);
    for (int i = ds.n(); i < r.augmented.n(); ++i) {
        const Eigen::Vector2d pt(r.augmented.features(i, 0), r.augmented.features(i, 1));
        const auto& hull = hulls[static_cast<std::size_t>(aug_gids[static_cast<std::size_t>(i)])];
        CHECK(testutil::inside_hull(hull, pt, 1e-9));
    }
}

TEST_CASE("smote refuses singleton groups and bad arguments") {
    Dataset ds = testutil::gaussian_oracle(5, 149, false);
    std::vector<char> keep(static_cast<std::size_t>(ds.n()), 1);
    bool kept_one = false;
    for (int i = 0; i < ds.n(); ++i)
        if (ds.labels[i] == 1) {
            keep[static_cast<std::size_t>(i)] = kept_one ? 0 : 1;
            kept_one = true;
        }
    ds = ds.filter(keep);

    const GroupIndexMap map = GroupIndexMap::from_schema(ds.schema);
    const std::vector<int> gids = row_group_ids(ds, map);
    const RebalancePlan plan = RebalancePlan::from_stats(group_stats(ds, map));
    CHECK_THROWS_WITH_AS(smote(ds, gids, 5, plan, map, 1), doctest::Contains("single row"),
                         Error);
    CHECK_THROWS_AS(smote(ds, gids, 0, plan, map, 1), Error);
}

TEST_CASE("undersampling balances a column downward") {
    Dataset ds = testutil::gaussian_oracle(60, 151, true);
    // thin to site counts (40, 50)
    long quota_a = 40, quota_b = 50;
    std::vector<char> keep(static_cast<std::size_t>(ds.n()), 0);
    for (int i = 0; i < ds.n(); ++i) {
        long& quota = ds.attributes(i, 0) == 0 ? quota_a : quota_b;
        if (quota > 0) {
            keep[static_cast<std::size_t>(i)] = 1;
            --quota;
        }
    }
    REQUIRE(quota_a == 0);
    REQUIRE(quota_b == 0);
    ds = ds.filter(keep);
    REQUIRE(ds.n() == 90);

    const Dataset bal = undersample_balance(ds, "site", 9);
    long bal_a = 0;
    for (int i = 0; i < bal.n(); ++i) bal_a += bal.attributes(i, 0) == 0;
    CHECK(bal.n() == 80);
    CHECK(bal_a == 40);

    // survivors keep their original order
    std::size_t cursor = 0;
    for (int i = 0; i < bal.n(); ++i) {
        while (cursor < static_cast<std::size_t>(ds.n()) &&
               ds.features(static_cast<long>(cursor), 0) != bal.features(i, 0))
            ++cursor;
        REQUIRE(cursor < static_cast<std::size_t>(ds.n()));
        ++cursor;
    }

    // already balanced: unchanged, including row identity
    const Dataset twice = undersample_balance(bal, "site", 10);
    CHECK(twice.features == bal.features);

    // works on the label column as well
    const Dataset by_label = undersample_balance(ds, "cls", 11);
    long pos = 0;
    for (int i = 0; i < by_label.n(); ++i) pos += by_label.labels[i] == 1;
    CHECK(pos * 2 == by_label.n());

    CHECK_THROWS_AS(undersample_balance(ds, "nope", 1), Error);
}
