// Command-line front end: dataset generation, training, filtering,
// evaluation, end-to-end scenario reproduction, and hyperparameter sweeps.

#include <CLI11.hpp>
#include <slf/slf.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

slf::bench::Profile profile_or_throw(const std::string& name) {
    return slf::bench::profile_by_name(name);
}

int cmd_generate(const std::string& preset, const std::string& profile,
                 std::uint64_t seed, const std::string& role, const fs::path& out) {
    const auto spec =
        slf::bench::make_spec(preset, profile_or_throw(profile), seed, fs::path{});
    const auto& cfg = role == "train" ? spec.train_cfg : spec.test_cfg;
    const auto tracks = slf::simkit::simulate_tracks(cfg);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    slf::io::write_dataset_csv(out, tracks);
    std::cout << "wrote " << out.string() << " (" << tracks.size() << " tracks, T="
              << cfg.T << ", seed=" << cfg.seed << ")\n";
    return 0;
}

int cmd_train(const fs::path& data, int tau, const slf::gbt::TrainParams& params,
              bool no_rotation, const fs::path& out) {
    const auto tracks = slf::io::read_dataset_csv(data);
    const auto model = slf::slf_train(tracks, tau, params, !no_rotation);
    slf::io::save_model_bundle(out, model, slf::io::dataset_fingerprint(tracks));
    std::cout << "trained on " << tracks.size() << " tracks"
              << " (training rmse " << slf::io::fmt(model.training_rmse);
    if (model.skipped_windows > 0)
        std::cout << ", skipped " << model.skipped_windows << " degenerate windows";
    std::cout << ")\nwrote model bundle " << out.string() << "\n";
    return 0;
}

int cmd_filter(const fs::path& data, const std::string& method, const fs::path& model_dir,
               double kf_qs, double kf_vx2, double kf_vy2, double dt,
               const fs::path& out) {
    const auto tracks = slf::io::read_dataset_csv(data);
    std::vector<std::vector<slf::Vec2>> estimates;
    estimates.reserve(tracks.size());

    if (method == "slf") {
        if (model_dir.empty())
            throw slf::InvalidArgument("filter: --model is required for --method slf");
        const auto model = slf::io::load_model_bundle(model_dir);
        for (const auto& tr : tracks) {
            std::vector<slf::Vec2> est;
            for (const auto& pe : slf::slf_filter_track(model, tr.meas))
                est.push_back(pe.position);
            estimates.push_back(std::move(est));
        }
    } else if (method == "kf") {
        const auto model = slf::kalman::KfModel::cv(dt, kf_qs, kf_vx2, kf_vy2);
        for (const auto& tr : tracks)
            estimates.push_back(slf::kalman::kf_run(tr.meas, model, dt));
    } else {
        for (const auto& tr : tracks) {
            std::vector<slf::Vec2> est;
            for (const auto& z : tr.meas) est.push_back(z.position());
            estimates.push_back(std::move(est));
        }
    }

    std::vector<int> track_ids(tracks.size());
    for (std::size_t t = 0; t < tracks.size(); ++t) track_ids[t] = tracks[t].track_id;
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    slf::io::write_estimates_csv(out, track_ids, estimates);
    std::cout << "wrote " << out.string() << " (" << method << ", " << estimates.size()
              << " tracks)\n";
    return 0;
}

int cmd_evaluate(const fs::path& data, const std::vector<std::string>& estimate_files,
                 std::vector<std::string> labels, const fs::path& out) {
    const auto tracks = slf::io::read_dataset_csv(data);
    const auto truth = slf::bench::truth_positions(tracks);

    if (labels.empty())
        for (const auto& f : estimate_files) labels.push_back(fs::path(f).stem().string());
    if (labels.size() != estimate_files.size())
        throw slf::InvalidArgument("evaluate: --label count must match --estimates count");

    std::vector<std::pair<std::string, std::vector<double>>> columns;
    for (std::size_t i = 0; i < estimate_files.size(); ++i) {
        const auto est = slf::io::read_estimates_csv(estimate_files[i]);
        const auto series = slf::bench::rmse_series(est, truth, labels[i]);
        std::cout << labels[i] << ": mean rmse "
                  << slf::io::fmt(slf::bench::mean_over(series, 1,
                                                        static_cast<int>(series.values.size())))
                  << " over k=1.." << series.values.size() << "\n";
        columns.emplace_back(labels[i], series.values);
    }
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    slf::io::write_results_csv(out, columns);
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_reproduce(const std::string& preset, const std::string& profile,
                  std::uint64_t seed, fs::path out) {
    if (out.empty()) out = fs::path("results") / preset;
    const auto base = slf::bench::make_spec(preset, profile_or_throw(profile), seed, out);

    if (preset == "qr-grid") {
        const auto grid = slf::bench::run_qr_grid(base, out);
        std::cout << "qs grid (R fixed at diag(30, 20)):\n";
        for (const auto& r : grid.qs_rows)
            std::cout << "  qs=" << slf::io::fmt(r.value) << "  slf "
                      << slf::io::fmt(r.mean_slf) << "  kf " << slf::io::fmt(r.mean_kf)
                      << "\n";
        std::cout << "R grid (qs fixed at 1):\n";
        for (const auto& [rv, r] : grid.r_rows)
            std::cout << "  R=diag(" << slf::io::fmt(rv[0]) << ", " << slf::io::fmt(rv[1])
                      << ")  slf " << slf::io::fmt(r.mean_slf) << "  kf "
                      << slf::io::fmt(r.mean_kf) << "\n";
        std::cout << "wrote " << (out / "qs_grid.csv").string() << " and "
                  << (out / "r_grid.csv").string() << "\n";
        return 0;
    }

    if (preset == "sweep") {
        const std::vector<std::pair<std::string, std::vector<double>>> axes = {
            {"tau", {5, 10, 15, 20, 25, 30}},
            {"samples", {250, 500, 1000, 2000}},
            {"nrounds", {10, 50, 100, 200}},
        };
        fs::create_directories(out);
        for (const auto& [axis, values] : axes) {
            const auto rows = slf::bench::sweep_hyperparams(base, axis, values);
            slf::bench::write_sweep_csv(out / ("sweep_" + axis + ".csv"), axis, rows);
            std::cout << axis << ":";
            for (const auto& r : rows)
                std::cout << "  " << slf::io::fmt(r.value) << "->"
                          << slf::io::fmt(r.mean_slf);
            std::cout << "\n";
        }
        std::cout << "wrote sweep tables under " << out.string() << "\n";
        return 0;
    }

    const auto res = slf::bench::run_experiment(base);
    for (const auto& [label, mean] : res.means)
        std::cout << label << ": mean rmse " << slf::io::fmt(mean) << " over k="
                  << res.k_lo << ".." << res.k_hi << "\n";
    std::cout << "wrote " << (out / "results.csv").string() << "\n";
    return 0;
}

int cmd_sweep(const std::string& axis, const std::vector<double>& values,
              const std::string& preset, const std::string& profile, std::uint64_t seed,
              fs::path out) {
    if (out.empty()) out = fs::path("results") / "sweep";
    const auto base = slf::bench::make_spec(preset, profile_or_throw(profile), seed, out);
    const auto rows = slf::bench::sweep_hyperparams(base, axis, values);
    fs::create_directories(out);
    const auto csv = out / ("sweep_" + axis + ".csv");
    slf::bench::write_sweep_csv(csv, axis, rows);
    std::cout << axis << ",mean_rmse_slf,mean_rmse_kf,mean_rmse_meas\n";
    for (const auto& r : rows)
        std::cout << slf::io::fmt(r.value) << "," << slf::io::fmt(r.mean_slf) << ","
                  << slf::io::fmt(r.mean_kf) << "," << slf::io::fmt(r.mean_meas) << "\n";
    std::cout << "wrote " << csv.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Supervised-learning tracking filter: simulation, training, and "
                 "Kalman-baseline comparison"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI-style config file");

    const std::vector<std::string> presets = {"general",  "sweep",    "special1",
                                              "special2", "special3", "ablation",
                                              "qr-grid"};
    const std::vector<std::string> profiles = {"desk", "paper", "smoke"};

    // generate
    auto* gen = app.add_subcommand("generate", "Simulate tracks and write a dataset CSV");
    gen->configurable();
    std::string gen_preset = "general", gen_profile = "desk", gen_role = "train";
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--preset", gen_preset, "Scenario preset")
        ->check(CLI::IsMember(presets));
    gen->add_option("--profile", gen_profile, "Scale profile")
        ->check(CLI::IsMember(profiles));
    gen->add_option("--seed", gen_seed, "Base seed (test role uses seed+1)")->required();
    gen->add_option("--role", gen_role, "Which split to generate")
        ->check(CLI::IsMember({"train", "test"}));
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a model bundle from a dataset CSV");
    train->configurable();
    std::string train_data, train_out;
    int train_tau = 20;
    bool train_norot = false;
    slf::gbt::TrainParams tp;
    tp.nrounds = 200;
    train->add_option("--data", train_data, "Training dataset CSV")->required();
    train->add_option("--tau", train_tau, "Sliding window length");
    train->add_option("--nrounds", tp.nrounds, "Boosting rounds");
    train->add_option("--max-depth", tp.max_depth, "Tree depth limit");
    train->add_option("--eta", tp.eta, "Shrinkage");
    train->add_option("--lambda", tp.lambda, "L2 leaf regularization");
    train->add_option("--gamma", tp.gamma, "Split gain threshold");
    train->add_option("--min-samples-leaf", tp.min_samples_leaf, "Minimum rows per leaf");
    train->add_option("--base-score", tp.base_score, "Initial prediction");
    train->add_flag("--no-rotation", train_norot, "Skip the window rotation mapping");
    train->add_option("--out", train_out, "Model bundle directory")->required();

    // filter
    auto* filt = app.add_subcommand("filter", "Run a filter over a dataset CSV");
    filt->configurable();
    std::string filt_data, filt_model, filt_out, filt_method = "slf";
    double filt_qs = 1.0, filt_vx2 = 30.0, filt_vy2 = 20.0, filt_dt = 1.0;
    filt->add_option("--data", filt_data, "Dataset CSV to filter")->required();
    filt->add_option("--method", filt_method, "Estimator to run")
        ->check(CLI::IsMember({"slf", "kf", "meas"}));
    filt->add_option("--model", filt_model, "Model bundle directory (slf method)");
    filt->add_option("--kf-qs", filt_qs, "Process intensity the KF assumes");
    filt->add_option("--kf-vx2", filt_vx2, "Measurement variance (x) the KF assumes");
    filt->add_option("--kf-vy2", filt_vy2, "Measurement variance (y) the KF assumes");
    filt->add_option("--dt", filt_dt, "Sampling interval");
    filt->add_option("--out", filt_out, "Estimates CSV path")->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Per-step RMSE of estimates against truth");
    eval->configurable();
    std::string eval_data, eval_out;
    std::vector<std::string> eval_estimates, eval_labels;
    eval->add_option("--data", eval_data, "Dataset CSV with ground truth")->required();
    eval->add_option("--estimates", eval_estimates, "Estimates CSV (repeatable)")
        ->required();
    eval->add_option("--label", eval_labels, "Column label per estimates file");
    eval->add_option("--out", eval_out, "RMSE series CSV path")->required();

    // reproduce
    auto* rep = app.add_subcommand(
        "reproduce", "Generate, train, filter, and evaluate one scenario end to end");
    rep->configurable();
    std::string rep_preset, rep_profile = "desk", rep_out;
    std::uint64_t rep_seed = 0;
    rep->add_option("preset", rep_preset, "Scenario preset")
        ->required()
        ->check(CLI::IsMember(presets));
    rep->add_option("--profile", rep_profile, "Scale profile")
        ->check(CLI::IsMember(profiles));
    rep->add_option("--seed", rep_seed, "Base seed")->required();
    rep->add_option("--out", rep_out, "Output directory (default results/<preset>)");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Mean RMSE across one hyperparameter axis");
    swp->configurable();
    std::string swp_axis, swp_preset = "general", swp_profile = "desk", swp_out;
    std::vector<double> swp_values;
    std::uint64_t swp_seed = 1;
    swp->add_option("--axis", swp_axis, "One of tau, samples, nrounds, max_depth, eta")
        ->required()
        ->check(CLI::IsMember({"tau", "samples", "nrounds", "max_depth", "eta"}));
    swp->add_option("--values", swp_values, "Axis values")->required();
    swp->add_option("--preset", swp_preset, "Scenario preset")
        ->check(CLI::IsMember(presets));
    swp->add_option("--profile", swp_profile, "Scale profile")
        ->check(CLI::IsMember(profiles));
    swp->add_option("--seed", swp_seed, "Base seed");
    swp->add_option("--out", swp_out, "Output directory (default results/sweep)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_generate(gen_preset, gen_profile, gen_seed, gen_role, gen_out);
        if (train->parsed())
            return cmd_train(train_data, train_tau, tp, train_norot, train_out);
        if (filt->parsed())
            return cmd_filter(filt_data, filt_method, filt_model, filt_qs, filt_vx2,
                              filt_vy2, filt_dt, filt_out);
        if (eval->parsed()) return cmd_evaluate(eval_data, eval_estimates, eval_labels, eval_out);
        if (rep->parsed()) return cmd_reproduce(rep_preset, rep_profile, rep_seed, rep_out);
        if (swp->parsed())
            return cmd_sweep(swp_axis, swp_values, swp_preset, swp_profile, swp_seed, swp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
