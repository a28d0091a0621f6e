#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "ggconv/errors.hpp"
#include "ggconv/experiment.hpp"

using namespace ggconv;

namespace {

int run_guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NonFiniteLoss& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const SingularKernel& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ZeroDistance& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

void add_dataset_options(CLI::App* cmd, ExperimentConfig& cfg) {
    cmd->add_option("--dataset", cfg.dataset,
                    "dataset path (.jsonl/.sdf) or synthetic:<count>:<seed>");
    cmd->add_option("--format", cfg.format, "dataset format: jsonl | sdf | auto");
    cmd->add_option("--target-field", cfg.target_field, "SDF data field holding the target");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--config", "JSON config file (applied before other flags)")
        ->type_name("FILE");
}

void add_split_options(CLI::App* cmd, ExperimentConfig& cfg,
                       std::vector<double>& fractions, std::vector<int>& counts) {
    cmd->add_option("--split", fractions, "train,val,test fractions")
        ->delimiter(',')
        ->expected(3);
    cmd->add_option("--split-counts", counts, "train,val,test sizes")
        ->delimiter(',')
        ->expected(3);
    cmd->add_option("--split-seed", cfg.split.seed, "shuffle seed for the split");
}

void add_model_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& order,
                       std::string& activation, std::string& readout) {
    cmd->add_option("--layers", cfg.model.num_layers, "number of convolution layers");
    cmd->add_option("--hidden", cfg.model.hidden_dim, "hidden width");
    cmd->add_option("--activation", activation, "relu | tanh | identity");
    cmd->add_option("--readout", readout, "mean | sum");
    cmd->add_option("--lr", cfg.model.learning_rate, "learning rate");
    cmd->add_option("--epochs", cfg.model.epochs, "training epochs");
    cmd->add_option("--order", order, "neighbor order: first | second | third");
    cmd->add_option("--seeds", cfg.seeds, "training seeds")->delimiter(',');
}

void finalize_enums(ExperimentConfig& cfg, const std::string& order,
                    const std::string& activation, const std::string& readout,
                    const std::string& mode) {
    if (!order.empty()) cfg.model.neighbor_order = neighbor_order_from_string(order);
    if (!activation.empty()) cfg.model.activation = activation_from_string(activation);
    if (!readout.empty()) cfg.model.readout = readout_from_string(readout);
    if (!mode.empty()) cfg.mode = experiment_mode_from_string(mode);
}

void apply_split_overrides(ExperimentConfig& cfg, const std::vector<double>& fractions,
                           const std::vector<int>& counts) {
    if (!counts.empty()) {
        cfg.split.counts = {counts[0], counts[1], counts[2]};
        cfg.split.fractions.reset();
    } else if (!fractions.empty()) {
        cfg.split.fractions = {fractions[0], fractions[1], fractions[2]};
        cfg.split.counts.reset();
    }
}

/// --config is applied before CLI11 sees the rest so that command-line
/// flags override file values (precedence: CLI > file > defaults).
void preload_config(int argc, char** argv, ExperimentConfig& cfg) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) {
            apply_config_file(cfg, argv[i + 1]);
            return;
        }
        if (arg.rfind("--config=", 0) == 0) {
            apply_config_file(cfg, arg.substr(9));
            return;
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distance-geometric graph convolutions: featurization, training, "
                 "hyperparameter optimization, reporting"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::vector<double> fractions;
    std::vector<int> counts;
    std::string order, activation, readout, mode;
    std::vector<double> params_flat;
    std::vector<double> space_flat;
    std::vector<std::string> report_dirs;
    std::string report_out = ".";

    auto* feat = app.add_subcommand("featurize", "write representation statistics");
    add_dataset_options(feat, cfg);

    auto* train_cmd = app.add_subcommand("train", "train and evaluate per mode");
    add_dataset_options(train_cmd, cfg);
    add_split_options(train_cmd, cfg, fractions, counts);
    add_model_options(train_cmd, cfg, order, activation, readout);
    train_cmd->add_option("--mode", mode, "standard | geometric-ref");
    train_cmd->add_option("--params", params_flat,
                          "six power-law parameters r0,n,r0_theta,n_theta,r0_phi,n_phi")
        ->delimiter(',')
        ->expected(6);

    auto* bho_cmd = app.add_subcommand("bho", "Bayesian optimization of the weighting parameters");
    add_dataset_options(bho_cmd, cfg);
    add_split_options(bho_cmd, cfg, fractions, counts);
    add_model_options(bho_cmd, cfg, order, activation, readout);
    bho_cmd->add_option("--trials", cfg.trials, "total trial budget");
    bho_cmd->add_option("--space", space_flat,
                        "twelve bounds lo,hi per dimension in the order "
                        "r0,n,r0_theta,n_theta,r0_phi,n_phi")
        ->delimiter(',')
        ->expected(12);

    auto* report_cmd = app.add_subcommand("report", "comparison table across runs");
    report_cmd->add_option("dirs", report_dirs, "run directories holding metrics.json");
    report_cmd->add_option("--out", report_out, "directory for report.txt / report.csv");

    return run_guarded([&]() -> int {
        preload_config(argc, argv, cfg);
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int rc = app.exit(e);
            return rc == 0 ? kExitOk : kExitUsage;
        }

        finalize_enums(cfg, order, activation, readout, mode);
        apply_split_overrides(cfg, fractions, counts);
        if (params_flat.size() == 6) {
            cfg.params = PowerLawParams{params_flat[0], params_flat[1], params_flat[2],
                                        params_flat[3], params_flat[4], params_flat[5]};
            if (cfg.mode == ExperimentMode::Standard) cfg.mode = ExperimentMode::GeometricRef;
        }
        if (space_flat.size() == 12) {
            cfg.space = HyperparamSpace{{space_flat[0], space_flat[1]},
                                        {space_flat[2], space_flat[3]},
                                        {space_flat[4], space_flat[5]},
                                        {space_flat[6], space_flat[7]},
                                        {space_flat[8], space_flat[9]},
                                        {space_flat[10], space_flat[11]}};
        }

        if (feat->parsed() || train_cmd->parsed() || bho_cmd->parsed()) {
            if (cfg.dataset.empty())
                throw std::invalid_argument("a dataset is required (--dataset or config file)");
        }

        if (feat->parsed()) return cmd_featurize(cfg);
        if (train_cmd->parsed()) return cmd_train(cfg);
        if (bho_cmd->parsed()) {
            cfg.mode = ExperimentMode::GeometricBho;
            return cmd_bho(cfg);
        }
        if (report_cmd->parsed()) {
            if (report_dirs.empty())
                throw std::invalid_argument("report needs at least one run directory");
            return cmd_report(report_dirs, report_out);
        }
        return kExitUsage;
    });
}
