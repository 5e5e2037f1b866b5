#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slf/core.hpp"
#include "slf/filter.hpp"
#include "slf/gbt.hpp"
#include "slf/io.hpp"
#include "slf/kalman.hpp"
#include "slf/preprocess.hpp"
#include "slf/simkit.hpp"
#include "slf/svg.hpp"

namespace slf::bench {

struct RmseSeries {
    std::string label;
    std::vector<double> values;  // index 0 is k = 1
};

inline RmseSeries rmse_series(const std::vector<std::vector<Vec2>>& estimates,
                              const std::vector<std::vector<Vec2>>& truth,
                              std::string label = "rmse") {
    if (estimates.empty() || estimates.size() != truth.size())
        throw InvalidArgument("rmse_series: track count mismatch");
    const std::size_t t_len = estimates.front().size();
    for (std::size_t j = 0; j < estimates.size(); ++j)
        if (estimates[j].size() != t_len || truth[j].size() != t_len)
            throw InvalidArgument("rmse_series: track length mismatch");

    RmseSeries out{std::move(label), std::vector<double>(t_len, 0.0)};
    const double n = static_cast<double>(estimates.size());
    for (std::size_t k = 0; k < t_len; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < estimates.size(); ++j)
            acc += (estimates[j][k] - truth[j][k]).squared_norm();
        out.values[k] = std::sqrt(acc / n);
    }
    return out;
}

inline std::vector<std::vector<Vec2>> truth_positions(
    const std::vector<simkit::TrackPair>& tracks) {
    std::vector<std::vector<Vec2>> out(tracks.size());
    for (std::size_t j = 0; j < tracks.size(); ++j) {
        out[j].reserve(tracks[j].truth.size());
        for (const auto& x : tracks[j].truth) out[j].push_back(x.position());
    }
    return out;
}

inline std::vector<std::vector<Vec2>> meas_positions(
    const std::vector<simkit::TrackPair>& tracks) {
    std::vector<std::vector<Vec2>> out(tracks.size());
    for (std::size_t j = 0; j < tracks.size(); ++j) {
        out[j].reserve(tracks[j].meas.size());
        for (const auto& z : tracks[j].meas) out[j].push_back(z.position());
    }
    return out;
}

/// Mean of the per-k values over the inclusive 1-based range [k_lo, k_hi].
inline double mean_over(const RmseSeries& s, int k_lo, int k_hi) {
    if (k_lo < 1 || k_hi < k_lo || static_cast<std::size_t>(k_hi) > s.values.size())
        throw InvalidArgument("mean_over: bad k-range");
    double acc = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) acc += s.values[static_cast<std::size_t>(k - 1)];
    return acc / static_cast<double>(k_hi - k_lo + 1);
}

inline double mean_over(const std::vector<double>& values, int k_lo, int k_hi) {
    return mean_over(RmseSeries{"", values}, k_lo, k_hi);
}

struct Profile {
    std::string name = "desk";
    int train_tracks = 2000;
    int test_tracks = 500;
    int nrounds = 200;
};

inline Profile profile_by_name(const std::string& name) {
    if (name == "desk") return {"desk", 2000, 500, 200};
    if (name == "paper") return {"paper", 10000, 5000, 500};
    if (name == "smoke") return {"smoke", 200, 60, 40};
    throw InvalidArgument("unknown profile: " + name);
}

struct ExperimentSpec {
    std::string preset = "general";
    std::string profile = "desk";
    simkit::ScenarioConfig train_cfg;
    simkit::ScenarioConfig test_cfg;
    gbt::TrainParams params;
    int tau = 20;
    double kf_qs = 1.0;  // process intensity the KF assumes (mismatch on purpose
    double kf_vx2 = 30.0;  // in the special-case presets)
    double kf_vy2 = 20.0;
    bool with_ablation = false;
    int summary_k_lo = 0;  // 0 selects the default [tau, T]
    int summary_k_hi = 0;
    std::filesystem::path out_dir;

    void validate() const {
        train_cfg.validate();
        test_cfg.validate();
        params.validate();
        if (tau < 2) throw InvalidArgument("ExperimentSpec: tau must be >= 2");
        if (train_cfg.seed == test_cfg.seed)
            throw InvalidArgument("ExperimentSpec: train and test seeds must differ");
        if (train_cfg.T < tau || test_cfg.T < tau)
            throw InvalidArgument("ExperimentSpec: T must be >= tau");
        if (kf_qs < 0.0 || kf_vx2 < 0.0 || kf_vy2 < 0.0)
            throw InvalidArgument("ExperimentSpec: KF noise assumptions must be >= 0");
    }
};

/// Scenario presets mirror the published experiment settings; the KF keeps
/// plain-Gaussian assumptions (qs = 1, R = diag(30, 20)) in every special
/// case, which is the deliberate model mismatch under test.
inline ExperimentSpec make_spec(const std::string& preset, const Profile& profile,
                                std::uint64_t seed,
                                const std::filesystem::path& out_dir) {
    ExperimentSpec spec;
    spec.preset = preset;
    spec.profile = profile.name;
    spec.out_dir = out_dir;
    spec.params = gbt::TrainParams{profile.nrounds, 8, 0.05, 1.0, 0.0, 1, 0.0};
    spec.tau = 20;

    simkit::ScenarioConfig cfg;
    cfg.dt = 1.0;
    cfg.T = 50;
    cfg.proc = simkit::ProcessNoiseSpec::gaussian(1.0);
    cfg.meas = simkit::MeasNoiseSpec::gaussian(30.0, 20.0);

    if (preset == "general" || preset == "sweep") {
        // defaults above
    } else if (preset == "special1") {
        cfg.T = 30;
        cfg.proc = simkit::ProcessNoiseSpec::time_varying(0.5);
    } else if (preset == "special2") {
        cfg.T = 30;
        cfg.proc = simkit::ProcessNoiseSpec::gauss_plus_exp(1.0, 1.0);
    } else if (preset == "special3") {
        cfg.T = 30;
        cfg.proc = simkit::ProcessNoiseSpec::gauss_plus_exp(1.0, 1.0);
        cfg.meas = simkit::MeasNoiseSpec::gauss_times_exp(30.0, 20.0, 1.0);
    } else if (preset == "ablation") {
        cfg.T = 30;
        spec.with_ablation = true;
    } else if (preset == "qr-grid") {
        cfg.T = 30;
    } else {
        throw InvalidArgument("unknown preset: " + preset);
    }

    spec.train_cfg = cfg;
    spec.test_cfg = cfg;
    spec.train_cfg.n_tracks = profile.train_tracks;
    spec.test_cfg.n_tracks = profile.test_tracks;
    spec.train_cfg.seed = seed;
    spec.test_cfg.seed = seed + 1;

    if (preset == "ablation") {
        spec.train_cfg.init_box = {{{0.0, 5000.0}, {0.0, 25.0}, {0.0, 5000.0}, {0.0, 30.0}}};
        spec.test_cfg.init_box = {
            {{-5000.0, 0.0}, {-25.0, 0.0}, {-5000.0, 0.0}, {-30.0, 0.0}}};
    }
    return spec;
}

struct ExperimentResult {
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    std::vector<std::pair<std::string, double>> means;
    int k_lo = 0;
    int k_hi = 0;
    SlfModel model;
    std::uint64_t train_fingerprint = 0;
};

/// Simulation, training, and evaluation without any file output.
inline ExperimentResult compute_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto train_tracks = simkit::simulate_tracks(spec.train_cfg);
    const auto test_tracks = simkit::simulate_tracks(spec.test_cfg);

    ExperimentResult res;
    res.model = slf_train(train_tracks, spec.tau, spec.params);
    res.train_fingerprint = io::dataset_fingerprint(train_tracks);

    const kalman::KfModel kf_model =
        kalman::KfModel::cv(spec.test_cfg.dt, spec.kf_qs, spec.kf_vx2, spec.kf_vy2);

    const auto truth = truth_positions(test_tracks);
    const auto meas = meas_positions(test_tracks);
    std::vector<std::vector<Vec2>> kf_est(test_tracks.size());
    std::vector<std::vector<Vec2>> slf_est(test_tracks.size());
    for (std::size_t j = 0; j < test_tracks.size(); ++j) {
        kf_est[j] = kalman::kf_run(test_tracks[j].meas, kf_model, spec.test_cfg.dt);
        const auto points = slf_filter_track(res.model, test_tracks[j].meas);
        slf_est[j].reserve(points.size());
        for (const auto& p : points) slf_est[j].push_back(p.position);
    }

    res.columns.emplace_back("rmse_meas", rmse_series(meas, truth).values);
    res.columns.emplace_back("rmse_kf", rmse_series(kf_est, truth).values);
    res.columns.emplace_back("rmse_slf", rmse_series(slf_est, truth).values);

    if (spec.with_ablation) {
        const SlfModel norot = slf_train(train_tracks, spec.tau, spec.params, false);
        std::vector<std::vector<Vec2>> norot_est(test_tracks.size());
        for (std::size_t j = 0; j < test_tracks.size(); ++j) {
            const auto points = slf_filter_track(norot, test_tracks[j].meas);
            norot_est[j].reserve(points.size());
            for (const auto& p : points) norot_est[j].push_back(p.position);
        }
        res.columns.emplace_back("rmse_slf_norot", rmse_series(norot_est, truth).values);
    }

    res.k_lo = spec.summary_k_lo > 0 ? spec.summary_k_lo : spec.tau;
    res.k_hi = spec.summary_k_hi > 0 ? spec.summary_k_hi : spec.test_cfg.T;
    for (const auto& [label, values] : res.columns)
        res.means.emplace_back(label, mean_over(values, res.k_lo, res.k_hi));
    return res;
}

namespace detail {

inline nlohmann::ordered_json scenario_json(const simkit::ScenarioConfig& cfg) {
    nlohmann::ordered_json j;
    j["dt"] = cfg.dt;
    j["T"] = cfg.T;
    j["n_tracks"] = cfg.n_tracks;
    j["seed"] = cfg.seed;
    j["init_box"] = cfg.init_box;
    switch (cfg.proc.kind) {
        case simkit::ProcessNoiseSpec::Kind::Gaussian:
            j["process_noise"] = {{"kind", "gaussian"}, {"qs", cfg.proc.qs}};
            break;
        case simkit::ProcessNoiseSpec::Kind::TimeVarying:
            j["process_noise"] = {{"kind", "time_varying"}, {"slope", cfg.proc.slope}};
            break;
        case simkit::ProcessNoiseSpec::Kind::GaussPlusExp:
            j["process_noise"] = {{"kind", "gauss_plus_exp"},
                                  {"qs", cfg.proc.qs},
                                  {"kappa", cfg.proc.kappa}};
            break;
    }
    if (cfg.meas.kind == simkit::MeasNoiseSpec::Kind::Gaussian)
        j["meas_noise"] = {{"kind", "gaussian"}, {"vx2", cfg.meas.vx2}, {"vy2", cfg.meas.vy2}};
    else
        j["meas_noise"] = {{"kind", "gauss_times_exp"},
                           {"vx2", cfg.meas.vx2},
                           {"vy2", cfg.meas.vy2},
                           {"kappa", cfg.meas.kappa}};
    return j;
}

}  // namespace detail

/// Runs the experiment and writes results.csv, summary.csv, config.json,
/// rmse.svg, and the trained model bundle into spec.out_dir. The summary is
/// recomputed from the emitted per-k series as a consistency check.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.out_dir.empty()) throw InvalidArgument("run_experiment: out_dir not set");
    ExperimentResult res = compute_experiment(spec);
    std::filesystem::create_directories(spec.out_dir);

    io::write_results_csv(spec.out_dir / "results.csv", res.columns);
    const auto reread = io::read_results_csv(spec.out_dir / "results.csv");
    if (reread.size() != res.columns.size())
        throw IoError("results.csv consistency check: column count changed");
    std::string summary = "method,k_lo,k_hi,mean_rmse\n";
    for (std::size_t c = 0; c < reread.size(); ++c) {
        const double mean = mean_over(reread[c].second, res.k_lo, res.k_hi);
        if (mean != res.means[c].second)
            throw IoError("results.csv consistency check: mean drifted for " +
                          res.means[c].first);
        summary += reread[c].first + "," + io::fmt(static_cast<std::int64_t>(res.k_lo)) +
                   "," + io::fmt(static_cast<std::int64_t>(res.k_hi)) + "," +
                   io::fmt(mean) + "\n";
    }
    io::write_text_file(spec.out_dir / "summary.csv", summary);

    nlohmann::ordered_json cfg;
    cfg["preset"] = spec.preset;
    cfg["profile"] = spec.profile;
    cfg["tau"] = spec.tau;
    cfg["train_params"] = io::params_to_json(spec.params);
    cfg["kf_assumed"] = {{"qs", spec.kf_qs}, {"vx2", spec.kf_vx2}, {"vy2", spec.kf_vy2}};
    cfg["summary_k"] = {res.k_lo, res.k_hi};
    cfg["train"] = detail::scenario_json(spec.train_cfg);
    cfg["test"] = detail::scenario_json(spec.test_cfg);
    io::write_text_file(spec.out_dir / "config.json", cfg.dump(1) + "\n");

    std::vector<svg::Series> plot;
    for (const auto& [label, values] : res.columns) plot.push_back({label, values});
    svg::write_line_chart(spec.out_dir / "rmse.svg",
                          spec.preset + " (" + spec.profile + ")", "k",
                          "position RMSE [m]", plot);

    io::save_model_bundle(spec.out_dir / "model", res.model, res.train_fingerprint);
    return res;
}

struct SweepRow {
    double value = 0.0;
    double mean_slf = 0.0;
    double mean_kf = 0.0;
    double mean_meas = 0.0;
};

inline void apply_axis(ExperimentSpec& spec, const std::string& axis, double value) {
    if (axis == "tau") {
        spec.tau = static_cast<int>(value);
    } else if (axis == "samples") {
        spec.train_cfg.n_tracks = static_cast<int>(value);
    } else if (axis == "nrounds") {
        spec.params.nrounds = static_cast<int>(value);
    } else if (axis == "max_depth") {
        spec.params.max_depth = static_cast<int>(value);
    } else if (axis == "eta") {
        spec.params.eta = value;
    } else {
        throw InvalidArgument("unknown sweep axis: " + axis);
    }
}

/// One experiment per value, all other settings from the base spec; the test
/// set stays fixed so rows are comparable.
inline std::vector<SweepRow> sweep_hyperparams(const ExperimentSpec& base,
                                               const std::string& axis,
                                               const std::vector<double>& values) {
    if (values.empty()) throw InvalidArgument("sweep_hyperparams: no values");
    std::vector<SweepRow> rows;
    for (double v : values) {
        ExperimentSpec spec = base;
        apply_axis(spec, axis, v);
        const ExperimentResult res = compute_experiment(spec);
        SweepRow row;
        row.value = v;
        for (const auto& [label, mean] : res.means) {
            if (label == "rmse_slf") row.mean_slf = mean;
            if (label == "rmse_kf") row.mean_kf = mean;
            if (label == "rmse_meas") row.mean_meas = mean;
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::string& axis,
                            const std::vector<SweepRow>& rows) {
    std::string out = axis + ",mean_rmse_slf,mean_rmse_kf,mean_rmse_meas\n";
    for (const auto& r : rows)
        out += io::fmt(r.value) + "," + io::fmt(r.mean_slf) + "," + io::fmt(r.mean_kf) +
               "," + io::fmt(r.mean_meas) + "\n";
    io::write_text_file(path, out);
}

struct QrGridResult {
    std::vector<SweepRow> qs_rows;  // value = qs
    std::vector<std::pair<std::array<double, 2>, SweepRow>> r_rows;  // {vx2, vy2}
};

/// Process-noise grid at fixed R, then measurement-noise grid at qs = 1,
/// with the KF matched to each grid point.
inline QrGridResult run_qr_grid(const ExperimentSpec& base,
                                const std::filesystem::path& out_dir) {
    QrGridResult res;
    for (double qs : {0.01, 0.1, 1.0, 3.0}) {
        ExperimentSpec spec = base;
        spec.train_cfg.proc = simkit::ProcessNoiseSpec::gaussian(qs);
        spec.test_cfg.proc = spec.train_cfg.proc;
        spec.kf_qs = qs;
        const ExperimentResult r = compute_experiment(spec);
        SweepRow row;
        row.value = qs;
        for (const auto& [label, mean] : r.means) {
            if (label == "rmse_slf") row.mean_slf = mean;
            if (label == "rmse_kf") row.mean_kf = mean;
            if (label == "rmse_meas") row.mean_meas = mean;
        }
        res.qs_rows.push_back(row);
    }
    for (auto [vx2, vy2] : {std::pair{3.0, 2.0}, std::pair{8.0, 5.0},
                            std::pair{15.0, 10.0}, std::pair{30.0, 20.0}}) {
        ExperimentSpec spec = base;
        spec.train_cfg.meas = simkit::MeasNoiseSpec::gaussian(vx2, vy2);
        spec.test_cfg.meas = spec.train_cfg.meas;
        spec.kf_vx2 = vx2;
        spec.kf_vy2 = vy2;
        const ExperimentResult r = compute_experiment(spec);
        SweepRow row;
        row.value = vx2;
        for (const auto& [label, mean] : r.means) {
            if (label == "rmse_slf") row.mean_slf = mean;
            if (label == "rmse_kf") row.mean_kf = mean;
            if (label == "rmse_meas") row.mean_meas = mean;
        }
        res.r_rows.emplace_back(std::array<double, 2>{vx2, vy2}, row);
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_sweep_csv(out_dir / "qs_grid.csv", "qs", res.qs_rows);
        std::string out = "vx2,vy2,mean_rmse_slf,mean_rmse_kf,mean_rmse_meas\n";
        for (const auto& [rv, row] : res.r_rows)
            out += io::fmt(rv[0]) + "," + io::fmt(rv[1]) + "," + io::fmt(row.mean_slf) +
                   "," + io::fmt(row.mean_kf) + "," + io::fmt(row.mean_meas) + "\n";
        io::write_text_file(out_dir / "r_grid.csv", out);
    }
    return res;
}

}  // namespace slf::bench
