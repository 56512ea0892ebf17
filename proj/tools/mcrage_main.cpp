#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mcrage/commands.hpp"

namespace {

void apply_overrides(mcrage::RunConfig& cfg, const CLI::Option* seed_opt, std::uint64_t seed,
                     const CLI::Option* out_opt, const std::string& out) {
    if (seed_opt->count()) cfg.master_seed = seed;
    if (out_opt->count()) cfg.out_dir = out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group rebalancing for tabular data with a conditional diffusion model"};
    app.require_subcommand(1);

    std::string reb_config, reb_out;
    std::uint64_t reb_seed = 0;
    CLI::App* reb = app.add_subcommand(
        "rebalance", "Train the model and append synthetic rows until all groups are equal");
    reb->add_option("--config", reb_config, "JSON run configuration")->required();
    CLI::Option* reb_seed_opt = reb->add_option("--seed", reb_seed, "Master seed override");
    CLI::Option* reb_out_opt = reb->add_option("--out", reb_out, "Output directory override");

    std::string exp_config, exp_out;
    std::uint64_t exp_seed = 0;
    CLI::App* exp = app.add_subcommand(
        "experiment", "Four-arm comparison: balanced, imbalanced, SMOTE, MCRAGE");
    exp->add_option("--config", exp_config, "JSON run configuration")->required();
    CLI::Option* exp_seed_opt = exp->add_option("--seed", exp_seed, "Master seed override");
    CLI::Option* exp_out_opt = exp->add_option("--out", exp_out, "Output directory override");

    std::string smp_checkpoint, smp_out = "samples.csv";
    int smp_class = 0;
    long smp_count = 0;
    std::uint64_t smp_seed = 0;
    double smp_guidance = 0.0;
    CLI::App* smp =
        app.add_subcommand("sample", "Draw rows of one group id from a saved checkpoint");
    smp->add_option("--checkpoint", smp_checkpoint, "Checkpoint file (sidecar .meta.json beside it)")
        ->required();
    smp->add_option("--class-id", smp_class, "Group id to condition on")->required();
    smp->add_option("--count", smp_count, "Rows to draw")->required();
    smp->add_option("--seed", smp_seed, "Sampling seed");
    smp->add_option("--out", smp_out, "Output CSV path");
    smp->add_option("--guidance", smp_guidance, "Classifier-free guidance weight");

    std::string ev_config, ev_train, ev_test, ev_out;
    std::uint64_t ev_seed = 0;
    CLI::App* ev = app.add_subcommand("eval", "Train a forest on one CSV, evaluate on another");
    ev->add_option("--config", ev_config, "JSON run configuration")->required();
    ev->add_option("--train", ev_train, "Training CSV")->required();
    ev->add_option("--test", ev_test, "Test CSV")->required();
    CLI::Option* ev_seed_opt = ev->add_option("--seed", ev_seed, "Master seed override");
    CLI::Option* ev_out_opt = ev->add_option("--out", ev_out, "Output directory override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*reb) {
            mcrage::RunConfig cfg = mcrage::load_config(reb_config);
            apply_overrides(cfg, reb_seed_opt, reb_seed, reb_out_opt, reb_out);
            mcrage::cmd_rebalance(cfg);
        } else if (*exp) {
            mcrage::RunConfig cfg = mcrage::load_config(exp_config);
            apply_overrides(cfg, exp_seed_opt, exp_seed, exp_out_opt, exp_out);
            mcrage::cmd_experiment(cfg);
        } else if (*smp) {
            mcrage::cmd_sample(smp_checkpoint, smp_class, smp_count, smp_seed, smp_out,
                               smp_guidance);
        } else if (*ev) {
            mcrage::RunConfig cfg = mcrage::load_config(ev_config);
            apply_overrides(cfg, ev_seed_opt, ev_seed, ev_out_opt, ev_out);
            mcrage::cmd_eval(cfg, ev_train, ev_test);
        }
    } catch (const mcrage::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const mcrage::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
