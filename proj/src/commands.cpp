#include "mcrage/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcrage/group_index.hpp"
#include "mcrage/metrics.hpp"
#include "mcrage/rebalance.hpp"
#include "mcrage/rng.hpp"

namespace mcrage {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int verbosity() {
    const char* v = std::getenv("MCRAGE_VERBOSE");
    return v ? std::atoi(v) : 0;
}

void log_stage(const std::string& msg) {
    if (verbosity() > 0) std::fprintf(stderr, "mcrage: %s\n", msg.c_str());
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

int positive_code(const ColumnSchema& schema, const std::string& positive_value) {
    if (positive_value.empty()) {
        if (schema.label_cardinality() < 2)
            throw Error("positive class: the label has fewer than 2 values");
        return 1;
    }
    for (int i = 0; i < schema.label_cardinality(); ++i)
        if (schema.label_values[static_cast<std::size_t>(i)] == positive_value) return i;
    throw Error("positive label value '" + positive_value + "' never appears in column '" +
                schema.label_name + "'");
}

// Code of `value` within `column` (an attribute or the label) of a coded schema.
int category_code(const ColumnSchema& s, const std::string& column, const std::string& value) {
    const std::vector<std::string>* table = nullptr;
    if (column == s.label_name) {
        table = &s.label_values;
    } else {
        for (int a = 0; a < s.attribute_count(); ++a)
            if (s.attribute_names[static_cast<std::size_t>(a)] == column)
                table = &s.attribute_values[static_cast<std::size_t>(a)];
    }
    if (!table) throw Error("column '" + column + "' is not an attribute or the label");
    for (std::size_t i = 0; i < table->size(); ++i)
        if ((*table)[i] == value) return static_cast<int>(i);
    throw Error("value '" + value + "' never appears in column '" + column + "'");
}

NoiseSchedule schedule_from_spec(const ScheduleSpec& spec, double diameter) {
    return default_schedule(diameter, spec.t_prime, spec.beta_start, spec.beta_end);
}

struct GridCell {
    double learning_rate = 0.0;
    double dropout_rate = 0.0;
    double f1 = 0.0;
    int epoch = 0;
};

// The MCRAGE treatment with optional hyperparameter grid search; the cell
// with the best probe F1 wins (first maximum on ties).
McrageResult run_mcrage_arm(const Dataset& std_ds, const GroupIndexMap& map,
                            const NoiseSchedule& sched, const RunConfig& cfg,
                            const GuidanceConfig& guidance, std::uint64_t seed, int pos,
                            std::vector<GridCell>* grid) {
    if (!cfg.grid_search.enabled) {
        log_stage("training (epochs=" + std::to_string(cfg.train.epochs) + ", T'=" +
                  std::to_string(sched.t_prime) + ")");
        return mcrage(std_ds, map, sched, cfg.train, guidance, seed, cfg.probe_trees, pos);
    }
    std::optional<McrageResult> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (double lr : cfg.grid_search.learning_rates) {
        for (double dr : cfg.grid_search.dropout_rates) {
            TrainConfig t = cfg.train;
            t.learning_rate = lr;
            t.dropout_rate = dr;
            log_stage("grid cell lr=" + fmt(lr) + " dropout=" + fmt(dr));
            McrageResult r = mcrage(std_ds, map, sched, t, guidance, seed, cfg.probe_trees, pos);
            const double raw_f1 = r.checkpoint.f1;
            const double score =
                std::isnan(raw_f1) ? -std::numeric_limits<double>::infinity() : raw_f1;
            if (grid) grid->push_back({lr, dr, raw_f1, r.checkpoint.epoch});
            if (!best || score > best_score) {
                best = std::move(r);
                best_score = score;
            }
        }
    }
    return std::move(*best);
}

json schedule_json(const NoiseSchedule& sched, bool paper_variance) {
    return json{{"t_prime", sched.t_prime},
                {"beta_start", sched.beta[0]},
                {"beta_end", sched.beta[sched.t_prime - 1]},
                {"paper_variance", paper_variance}};
}

void write_checkpoint_meta(const std::string& path, const McrageResult& result,
                           const GuidanceConfig& guidance, const ScalerParams& scaler,
                           const ColumnSchema& schema) {
    json j;
    j["format"] = 1;
    j["epoch"] = result.checkpoint.epoch;
    j["f1"] = std::isnan(result.checkpoint.f1) ? json() : json(result.checkpoint.f1);
    j["p_uncond"] =
        std::isnan(result.trained_p_uncond) ? json() : json(result.trained_p_uncond);
    j["schedule"] = schedule_json(result.schedule, guidance.paper_variance);
    j["scaler"]["mean"] = std::vector<double>(scaler.mean.begin(), scaler.mean.end());
    j["scaler"]["stddev"] = std::vector<double>(scaler.stddev.begin(), scaler.stddev.end());
    j["schema"]["continuous"] = schema.continuous_names;
    j["schema"]["attributes"] = schema.attribute_names;
    j["schema"]["label"] = schema.label_name;
    j["schema"]["attribute_values"] = schema.attribute_values;
    j["schema"]["label_values"] = schema.label_values;
    write_file_atomic(path, j.dump(2) + "\n");
}

struct CheckpointMeta {
    ColumnSchema schema;
    ScalerParams scaler;
    NoiseSchedule schedule;
    bool paper_variance = false;
    double p_uncond = std::numeric_limits<double>::quiet_NaN();
};

CheckpointMeta read_checkpoint_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("sample: cannot open checkpoint sidecar '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("sample: sidecar '" + path + "' is not valid JSON: " + e.what());
    }
    CheckpointMeta meta;
    try {
        const json& js = j.at("schema");
        meta.schema.continuous_names = js.at("continuous").get<std::vector<std::string>>();
        meta.schema.attribute_names = js.at("attributes").get<std::vector<std::string>>();
        meta.schema.label_name = js.at("label").get<std::string>();
        meta.schema.attribute_values =
            js.at("attribute_values").get<std::vector<std::vector<std::string>>>();
        meta.schema.label_values = js.at("label_values").get<std::vector<std::string>>();

        const auto mean = j.at("scaler").at("mean").get<std::vector<double>>();
        const auto stddev = j.at("scaler").at("stddev").get<std::vector<double>>();
        meta.scaler.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<long>(mean.size()));
        meta.scaler.stddev =
            Eigen::Map<const Eigen::VectorXd>(stddev.data(), static_cast<long>(stddev.size()));

        const json& sj = j.at("schedule");
        meta.schedule = linear_schedule(sj.at("t_prime").get<int>(),
                                        sj.at("beta_start").get<double>(),
                                        sj.at("beta_end").get<double>());
        meta.paper_variance = sj.value("paper_variance", false);
        if (j.contains("p_uncond") && !j["p_uncond"].is_null())
            meta.p_uncond = j["p_uncond"].get<double>();
    } catch (const json::exception& e) {
        throw Error("sample: sidecar '" + path + "' is malformed: " + e.what());
    }
    return meta;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw Error("cannot open '" + tmp + "' for writing");
        f << content;
        if (!f) throw Error("write failed for '" + tmp + "'");
    }
    fs::rename(tmp, path);
}

void cmd_rebalance(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    log_stage("loading " + cfg.dataset_path);
    const Dataset raw = load_csv(cfg.dataset_path, cfg.schema);
    const int pos = positive_code(raw.schema, cfg.positive_value);

    Dataset ds = raw;
    if (cfg.imbalance && cfg.imbalance->fraction < 1.0) {
        const int code =
            category_code(raw.schema, cfg.imbalance->column, cfg.imbalance->minority_value);
        ds = make_imbalanced(ds, cfg.imbalance->column, code, cfg.imbalance->fraction,
                             cfg.stage_seed("imbalance"));
    }

    const auto [std_ds, scaler] = standardize(ds);
    const GroupIndexMap map = GroupIndexMap::from_schema(std_ds.schema);
    const GroupStats stats = group_stats(std_ds, map);
    const NoiseSchedule sched =
        schedule_from_spec(cfg.schedule, dataset_diameter(std_ds.features));
    GuidanceConfig guidance = cfg.guidance;
    guidance.paper_variance = cfg.schedule.paper_variance;

    std::vector<GridCell> grid;
    const McrageResult result = run_mcrage_arm(std_ds, map, sched, cfg, guidance,
                                               cfg.stage_seed("mcrage"), pos, &grid);

    Dataset augmented = destandardize(result.augmented, scaler);
    augmented.features.topRows(ds.n()) = ds.features;  // originals byte-exact
    write_csv(augmented, join(cfg.out_dir, "augmented.csv"));

    save_checkpoint(join(cfg.out_dir, "checkpoint.bin"), result.checkpoint);
    write_checkpoint_meta(join(cfg.out_dir, "checkpoint.bin.meta.json"), result, guidance, scaler,
                          std_ds.schema);

    std::string curve = "epoch,loss\n";
    for (std::size_t i = 0; i < result.loss_curve.size(); ++i)
        curve += std::to_string(i + 1) + "," + fmt17(result.loss_curve[i]) + "\n";
    write_file_atomic(join(cfg.out_dir, "loss_curve.csv"), curve);

    std::string probes = "epoch,f1\n";
    for (const ProbePoint& p : result.f1_probes)
        probes += std::to_string(p.epoch) + "," + fmt17(p.f1) + "\n";
    write_file_atomic(join(cfg.out_dir, "f1_probes.csv"), probes);

    if (cfg.grid_search.enabled) {
        std::string gridcsv = "learning_rate,dropout_rate,best_f1,best_epoch\n";
        for (const GridCell& c : grid)
            gridcsv += fmt17(c.learning_rate) + "," + fmt17(c.dropout_rate) + "," +
                       fmt17(c.f1) + "," + std::to_string(c.epoch) + "\n";
        write_file_atomic(join(cfg.out_dir, "grid_search.csv"), gridcsv);
    }

    json manifest;
    manifest["majority_group"] = result.plan.majority;
    manifest["total_synthetic"] = result.plan.total_synthetic;
    const long top = stats.counts[static_cast<std::size_t>(stats.majority)];
    json groups = json::array();
    for (int g = 0; g < map.group_count(); ++g) {
        const std::vector<int> tuple = map.decode(g);
        json values = json::array();
        values.push_back(std_ds.schema.label_values[static_cast<std::size_t>(tuple[0])]);
        for (int a = 0; a < std_ds.schema.attribute_count(); ++a)
            values.push_back(std_ds.schema.attribute_values[static_cast<std::size_t>(a)]
                                                           [static_cast<std::size_t>(tuple[static_cast<std::size_t>(a) + 1])]);
        groups.push_back(json{{"id", g},
                              {"values", values},
                              {"count_before", stats.counts[static_cast<std::size_t>(g)]},
                              {"deficit", result.plan.deficits[static_cast<std::size_t>(g)]},
                              {"count_after", top}});
    }
    manifest["groups"] = groups;
    manifest["schedule"] = schedule_json(result.schedule, guidance.paper_variance);
    manifest["best_epoch"] = result.checkpoint.epoch;
    manifest["best_f1"] =
        std::isnan(result.checkpoint.f1) ? json() : json(result.checkpoint.f1);
    manifest["positive_class"] = std_ds.schema.label_values[static_cast<std::size_t>(pos)];
    manifest["seed"] = cfg.master_seed;
    manifest["rows_in"] = ds.n();
    manifest["rows_out"] = result.augmented.n();
    write_file_atomic(join(cfg.out_dir, "manifest.json"), manifest.dump(2) + "\n");
    log_stage("rebalance finished: " + std::to_string(result.plan.total_synthetic) +
              " synthetic rows");
}

void cmd_sample(const std::string& checkpoint_path, int class_id, long count, std::uint64_t seed,
                const std::string& out_csv, double guidance_weight) {
    if (count < 0) throw Error("sample: count must be >= 0");
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const CheckpointMeta meta = read_checkpoint_meta(checkpoint_path + ".meta.json");
    const DenoiserParams& p = ckpt.params;

    if (meta.schema.continuous_count() != p.d)
        throw Error("sample: checkpoint dimension " + std::to_string(p.d) +
                    " does not match the sidecar schema's " +
                    std::to_string(meta.schema.continuous_count()));
    if (meta.scaler.mean.size() != p.d)
        throw Error("sample: sidecar scaler dimension mismatch");
    const GroupIndexMap map = GroupIndexMap::from_schema(meta.schema);
    if (map.group_count() != p.group_count)
        throw Error("sample: checkpoint group count " + std::to_string(p.group_count) +
                    " does not match the sidecar schema's " + std::to_string(map.group_count()));
    if (meta.schedule.t_prime != p.t_prime)
        throw Error("sample: sidecar schedule T' does not match the checkpoint");
    if (class_id < 0 || class_id >= map.group_count())
        throw Error("sample: class id " + std::to_string(class_id) + " outside [0," +
                    std::to_string(map.group_count()) + ")");
    if (guidance_weight != 0.0 && meta.p_uncond == 0.0)
        throw Error("sample: guidance weight is nonzero but the model trained with p_uncond 0");

    Dataset out;
    out.schema = meta.schema;
    const std::vector<int> tuple = map.decode(class_id);
    out.attributes.resize(count, meta.schema.attribute_count());
    out.labels.resize(count);
    for (long i = 0; i < count; ++i) {
        out.labels[i] = tuple[0];
        for (int a = 0; a < meta.schema.attribute_count(); ++a)
            out.attributes(i, a) = tuple[static_cast<std::size_t>(a) + 1];
    }
    if (count > 0) {
        GuidanceConfig guidance;
        guidance.weight = guidance_weight;
        guidance.paper_variance = meta.paper_variance;
        out.features =
            sample(p, meta.schedule, class_id, static_cast<int>(count), guidance, seed);
        out.synthetic.assign(static_cast<std::size_t>(count), 1);
        out = destandardize(out, meta.scaler);
    } else {
        out.features.resize(0, p.d);
    }
    write_csv(out, out_csv);
    log_stage("wrote " + std::to_string(count) + " rows to " + out_csv);
}

void cmd_eval(const RunConfig& cfg, const std::string& train_csv, const std::string& test_csv) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    const Dataset train = load_csv(train_csv, cfg.schema);
    const Dataset test = load_csv(test_csv, train.schema);  // frozen coding
    const int pos = positive_code(train.schema, cfg.positive_value);
    const GroupIndexMap map = GroupIndexMap::from_schema(train.schema);

    ForestConfig fc = cfg.forest;
    fc.seed = cfg.stage_seed("forest");
    log_stage("fitting forest (" + std::to_string(fc.tree_count) + " trees)");
    const Forest forest = Forest::fit(forest_inputs(train), train.labels, fc);
    const EvalReport report = per_group_report(forest, test, map, pos);
    write_file_atomic(join(cfg.out_dir, "eval_report.txt"), report.to_text());
}

void cmd_experiment(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    log_stage("loading " + cfg.dataset_path);
    const Dataset raw = load_csv(cfg.dataset_path, cfg.schema);
    const int pos = positive_code(raw.schema, cfg.positive_value);
    const GroupIndexMap map = GroupIndexMap::from_schema(raw.schema);

    Dataset base = raw;
    if (cfg.imbalance && cfg.balance_attribute)
        base = undersample_balance(raw, cfg.imbalance->column, cfg.stage_seed("balance"));

    std::vector<int> strat;
    if (cfg.split.stratified) {
        strat.resize(static_cast<std::size_t>(base.n()));
        for (long i = 0; i < base.labels.size(); ++i)
            strat[static_cast<std::size_t>(i)] = base.labels[i];
    }
    const auto [train_bal, test] =
        train_test_split(base, cfg.split.test_fraction, cfg.stage_seed("split"), strat);

    Dataset train_imb = train_bal;
    if (cfg.imbalance && cfg.imbalance->fraction < 1.0) {
        const int code =
            category_code(raw.schema, cfg.imbalance->column, cfg.imbalance->minority_value);
        train_imb = make_imbalanced(train_bal, cfg.imbalance->column, code,
                                    cfg.imbalance->fraction, cfg.stage_seed("imbalance"));
    }

    const auto [std_imb, scaler] = standardize(train_imb);
    const NoiseSchedule sched =
        schedule_from_spec(cfg.schedule, dataset_diameter(std_imb.features));
    GuidanceConfig guidance = cfg.guidance;
    guidance.paper_variance = cfg.schedule.paper_variance;

    log_stage("smote arm");
    const std::vector<int> gids = row_group_ids(std_imb, map);
    const GroupStats stats = group_stats(std_imb, map);
    const RebalancePlan plan = RebalancePlan::from_stats(stats);
    const SmoteResult sr = smote(std_imb, gids, cfg.smote_k, plan, map, cfg.stage_seed("smote"));
    Dataset train_smote = destandardize(sr.augmented, scaler);
    train_smote.features.topRows(train_imb.n()) = train_imb.features;

    log_stage("mcrage arm");
    std::vector<GridCell> grid;
    const McrageResult mr = run_mcrage_arm(std_imb, map, sched, cfg, guidance,
                                           cfg.stage_seed("mcrage"), pos, &grid);
    Dataset train_mcrage = destandardize(mr.augmented, scaler);
    train_mcrage.features.topRows(train_imb.n()) = train_imb.features;

    struct Arm {
        const char* name;
        const Dataset* train;
    };
    const Arm arms[4] = {{"original", &train_bal},
                         {"imbalanced", &train_imb},
                         {"smote", &train_smote},
                         {"mcrage", &train_mcrage}};
    EvalReport reports[4];
    for (int i = 0; i < 4; ++i) {
        ForestConfig fc = cfg.forest;
        fc.seed = cfg.share_forest_seed ? cfg.stage_seed("forest")
                                        : cfg.stage_seed("forest", static_cast<std::uint64_t>(i));
        log_stage(std::string("fitting forest for arm ") + arms[i].name);
        const Forest forest =
            Forest::fit(forest_inputs(*arms[i].train), arms[i].train->labels, fc);
        reports[i] = per_group_report(forest, test, map, pos);
    }

    std::string rep = "arm accuracy_pct f1 auroc\n";
    for (int i = 0; i < 4; ++i)
        rep += std::string(arms[i].name) + " " + fmt(reports[i].accuracy * 100.0) + " " +
               fmt(reports[i].f1) + " " + fmt(reports[i].auroc) + "\n";
    rep += "\n";
    for (int i = 0; i < 4; ++i)
        rep += "[" + std::string(arms[i].name) + "]\n" + reports[i].to_text() + "\n";
    write_file_atomic(join(cfg.out_dir, "report.txt"), rep);

    // Distribution diagnostics: original rows of the imbalanced arm against
    // each treatment's synthetic rows, per continuous feature.
    std::string dist = "arm,feature,w1\n";
    std::string hist = "arm,feature,bin,lo,hi,real_count,synthetic_count\n";
    for (int i = 2; i < 4; ++i) {
        const Dataset& tr = *arms[i].train;
        const long n_orig = train_imb.n();
        const long n_synth = tr.n() - n_orig;
        if (n_synth == 0) continue;
        for (int j = 0; j < tr.d(); ++j) {
            std::vector<double> real(static_cast<std::size_t>(n_orig));
            std::vector<double> synth(static_cast<std::size_t>(n_synth));
            for (long r = 0; r < n_orig; ++r) real[static_cast<std::size_t>(r)] = tr.features(r, j);
            for (long r = 0; r < n_synth; ++r)
                synth[static_cast<std::size_t>(r)] = tr.features(n_orig + r, j);
            const DistributionDistance dd = feature_distribution_distance(real, synth);
            const std::string feat = tr.schema.continuous_names[static_cast<std::size_t>(j)];
            dist += std::string(arms[i].name) + "," + feat + "," + fmt17(dd.w1) + "\n";
            const double lo = dd.histogram.lo, hi = dd.histogram.hi;
            const int bins = static_cast<int>(dd.histogram.real_counts.size());
            for (int b = 0; b < bins; ++b) {
                const double blo = lo + (hi - lo) * double(b) / double(bins);
                const double bhi = lo + (hi - lo) * double(b + 1) / double(bins);
                hist += std::string(arms[i].name) + "," + feat + "," + std::to_string(b) + "," +
                        fmt17(blo) + "," + fmt17(bhi) + "," +
                        std::to_string(dd.histogram.real_counts[static_cast<std::size_t>(b)]) + "," +
                        std::to_string(dd.histogram.synth_counts[static_cast<std::size_t>(b)]) + "\n";
            }
        }
    }
    write_file_atomic(join(cfg.out_dir, "distribution_distances.csv"), dist);
    write_file_atomic(join(cfg.out_dir, "histograms.csv"), hist);

    std::string proj = "arm,pc1,pc2,synthetic,label\n";
    for (int i = 0; i < 4; ++i) {
        const Dataset& tr = *arms[i].train;
        const PcaResult pca = pca_project(tr.features);
        for (long r = 0; r < tr.n(); ++r) {
            const int flag = tr.has_flags() ? int(tr.synthetic[static_cast<std::size_t>(r)]) : 0;
            proj += std::string(arms[i].name) + "," + fmt17(pca.coords(r, 0)) + "," +
                    fmt17(pca.coords(r, 1)) + "," + std::to_string(flag) + "," +
                    tr.schema.label_values[static_cast<std::size_t>(tr.labels[r])] + "\n";
        }
    }
    write_file_atomic(join(cfg.out_dir, "projection.csv"), proj);

    write_csv(test, join(cfg.out_dir, "test.csv"));
    write_csv(train_bal, join(cfg.out_dir, "arm_original.csv"));
    write_csv(train_imb, join(cfg.out_dir, "arm_imbalanced.csv"));
    write_csv(train_smote, join(cfg.out_dir, "arm_smote.csv"));
    write_csv(train_mcrage, join(cfg.out_dir, "arm_mcrage.csv"));

    json manifest;
    manifest["test_rows"] = test.n();
    json jarms;
    for (int i = 0; i < 4; ++i) {
        const Dataset& tr = *arms[i].train;
        const long synth = tr.has_flags()
                               ? std::count(tr.synthetic.begin(), tr.synthetic.end(), std::uint8_t(1))
                               : 0L;
        jarms[arms[i].name] = json{{"rows", tr.n()},
                                   {"synthetic_rows", synth},
                                   {"accuracy", reports[i].accuracy},
                                   {"f1", reports[i].f1},
                                   {"auroc", reports[i].auroc}};
    }
    manifest["arms"] = jarms;
    manifest["majority_group"] = plan.majority;
    manifest["deficits"] = plan.deficits;
    manifest["schedule"] = schedule_json(mr.schedule, guidance.paper_variance);
    manifest["best_epoch"] = mr.checkpoint.epoch;
    manifest["best_f1"] = std::isnan(mr.checkpoint.f1) ? json() : json(mr.checkpoint.f1);
    manifest["positive_class"] = raw.schema.label_values[static_cast<std::size_t>(pos)];
    manifest["seed"] = cfg.master_seed;
    if (cfg.grid_search.enabled) {
        json jg = json::array();
        for (const GridCell& c : grid)
            jg.push_back(json{{"learning_rate", c.learning_rate},
                              {"dropout_rate", c.dropout_rate},
                              {"best_f1", std::isnan(c.f1) ? json() : json(c.f1)},
                              {"best_epoch", c.epoch}});
        manifest["grid"] = jg;
    }
    write_file_atomic(join(cfg.out_dir, "manifest.json"), manifest.dump(2) + "\n");
    log_stage("experiment finished");
}

}  // namespace mcrage
